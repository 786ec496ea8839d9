#include <catch2/catch_amalgamated.hpp>

#include <gridshed/common.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

using namespace gridshed;

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 1e-300, 1e300, 123456.789,
                   0.034999999999999996, -0.0}) {
    std::string s = format_double(v);
    double back = parse_double_strict(s, "round trip");
    CHECK(back == v);
  }
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(100.0) == "100");
}

TEST_CASE("strict numeric parsing rejects partial and junk input") {
  CHECK(parse_double_strict("0.25", "t") == 0.25);
  CHECK(parse_double_strict("-3e2", "t") == -300.0);
  CHECK_THROWS_AS(parse_double_strict("", "t"), ParseError);
  CHECK_THROWS_AS(parse_double_strict("1.5x", "t"), ParseError);
  CHECK_THROWS_AS(parse_double_strict(" 1.5", "t"), ParseError);
  CHECK_THROWS_WITH(parse_double_strict("abc", "outages: line 3"),
                    Catch::Matchers::ContainsSubstring("outages: line 3"));

  CHECK(parse_int_strict("42", "t") == 42);
  CHECK(parse_int_strict("-7", "t") == -7);
  CHECK_THROWS_AS(parse_int_strict("4.2", "t"), ParseError);
  CHECK_THROWS_AS(parse_int_strict("7 ", "t"), ParseError);
  CHECK_THROWS_AS(parse_int_strict("", "t"), ParseError);
}

TEST_CASE("trim strips spaces tabs and carriage returns") {
  CHECK(trim("  a b \t") == "a b");
  CHECK(trim("x\r") == "x");
  CHECK(trim("\r\n") == "\n");  // interior newline is content, not padding
  CHECK(trim("") == "");
  CHECK(trim("   ") == "");
}

TEST_CASE("split keeps empty fields") {
  auto f = split("a,b,,c", ',');
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a");
  CHECK(f[2] == "");
  CHECK(f[3] == "c");
  auto single = split("abc", ',');
  REQUIRE(single.size() == 1);
  CHECK(single[0] == "abc");
  auto trailing = split("a,", ',');
  REQUIRE(trailing.size() == 2);
  CHECK(trailing[1] == "");
}

TEST_CASE("split_lines drops the trailing newline row") {
  auto rows = split_lines("a\nb\nc\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[2] == "c");
  auto rows2 = split_lines("a\nb");
  REQUIRE(rows2.size() == 2);
  auto rows3 = split_lines("");
  CHECK(rows3.empty());
  auto rows4 = split_lines("\n\nx");
  REQUIRE(rows4.size() == 3);
  CHECK(rows4[0] == "");
  CHECK(rows4[2] == "x");
}

TEST_CASE("quantile_linear follows the inclusive interpolation rule") {
  std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(quantile_linear(v, 0.0) == 1.0);
  CHECK(quantile_linear(v, 0.25) == 2.0);
  CHECK(quantile_linear(v, 0.5) == 3.0);
  CHECK(quantile_linear(v, 0.75) == 4.0);
  CHECK(quantile_linear(v, 1.0) == 5.0);

  std::vector<double> w{1, 2, 3, 4};
  CHECK(quantile_linear(w, 0.5) == 2.5);
  CHECK(quantile_linear(w, 0.25) == 1.75);
  CHECK(quantile_linear(w, 0.75) == 3.25);

  std::vector<double> one{7};
  CHECK(quantile_linear(one, 0.31) == 7.0);
  CHECK(quantile_linear({}, 0.5) == 0.0);
}

TEST_CASE("sha256 matches published vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  std::string million(1000000, 'a');
  CHECK(sha256_hex(million) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
  // 64-byte message exercises the padding block boundary
  std::string block(64, 'x');
  CHECK(sha256_hex(block) == sha256_hex(block));
  CHECK(sha256_hex(block) != sha256_hex(std::string(63, 'x')));
}

TEST_CASE("text file round trip and read failure") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "gridshed_common_test";
  fs::create_directories(dir);
  fs::path file = dir / "t.txt";
  write_text_file(file, "line1\nline2\n");
  CHECK(read_text_file(file) == "line1\nline2\n");
  CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), ParseError);
  fs::remove_all(dir);
}
