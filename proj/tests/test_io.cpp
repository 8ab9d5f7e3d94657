#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "brw/error.hpp"
#include "brw/io.hpp"

using namespace brw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv text") {
  CsvTable t;
  t.header = {"x", "u"};
  CHECK(to_csv(t) == "x,u\n");
  t.add(std::int64_t{3}, 0.25);
  t.add(std::int64_t{-1}, "a,b");
  t.add(std::int64_t{2}, "say \"hi\"");
  t.add(std::int64_t{0}, true);
  CHECK(to_csv(t) == "x,u\n3,0.25\n-1,\"a,b\"\n2,\"say \"\"hi\"\"\"\n0,true\n");
}

TEST_CASE("numbers round-trip") {
  for (double v : {0.1, 1.0 / 3.0, 6.0e-23, 123456789.125, -2.5e300, 0.0}) {
    const std::string s = format_number(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(std::int64_t{-7}) == "-7");
  CHECK(format_number(std::numeric_limits<std::uint64_t>::max()) == "18446744073709551615");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("atomic writes replace the whole file") {
  const fs::path dir = scratch_dir("brw_io_test");
  const fs::path file = dir / "out.csv";
  write_file_atomic(file.string(), "first version, long\n");
  CHECK(slurp(file) == "first version, long\n");
  write_file_atomic(file.string(), "second\n");
  CHECK(slurp(file) == "second\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("missing directory is an I/O failure") {
  const fs::path file = fs::temp_directory_path() / "brw_no_such_dir" / "sub" / "x.csv";
  fs::remove_all(fs::temp_directory_path() / "brw_no_such_dir");
  try {
    write_file_atomic(file.string(), "x\n");
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IoFailure);
  }
}
