#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <gtest/gtest.h>

#include "hypl2/io/json_io.hpp"

using namespace hypl2;
using io::json;

namespace {

std::string error_of(const std::function<void()>& f, ErrorCode want) {
  try {
    f();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), want) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error";
  return {};
}

}  // namespace

TEST(Io, RationalAndBigInt) {
  EXPECT_EQ(io::get_rational(json("-3/12"), "$"), Rational(-1, 4));
  EXPECT_EQ(io::get_rational(json(7), "$"), Rational(7));
  EXPECT_EQ(io::get_bigint(json("123456789012345678901234567890"), "$"),
            BigInt("123456789012345678901234567890"));
  error_of([] { io::get_rational(json("1/0"), "$.x"); }, ErrorCode::SchemaError);
  error_of([] { io::get_rational(json("1/2/3"), "$.x"); }, ErrorCode::SchemaError);
  error_of([] { io::get_bigint(json("12a"), "$.x"); }, ErrorCode::SchemaError);
  error_of([] { io::get_rational(json(0.5), "$.x"); }, ErrorCode::SchemaError);
}

TEST(Io, SurdToQuadMatchesExactValue) {
  // (sqrt5 - 1)/2 as {a, b}, then as quad float
  const json j = {{"a", "-1/2"}, {"b", "1/2"}};
  const auto s = io::get_surd(j, "$");
  EXPECT_EQ(s.rational_part(), Rational(-1, 2));
  EXPECT_EQ(s.surd_part(), Rational(1, 2));
  const Quad q = io::get_quad(j, "$");
  const Quad want = (boost::multiprecision::sqrt(Quad(5)) - 1) / 2;
  EXPECT_LT(static_cast<double>(boost::multiprecision::abs(q - want)), 1e-30);
  EXPECT_LT(static_cast<double>(boost::multiprecision::abs(io::get_quad(json("3/10"), "$") - Quad(3) / 10)), 1e-32);
  EXPECT_EQ(io::get_quad(json("0.25"), "$"), Quad(0.25));
}

TEST(Io, UnknownAndMissingKeysNameThePath) {
  const auto unknown = error_of([] { io::parse_tube(json{{"k_list", {1}}, {"l_list", {1e-4}}, {"cell", 3}}); },
                                ErrorCode::SchemaError);
  EXPECT_NE(unknown.find("$.cell: unknown key"), std::string::npos);
  const auto missing = error_of([] { io::parse_tube(json{{"k_list", {1}}}); }, ErrorCode::SchemaError);
  EXPECT_NE(missing.find("$.l_list: missing required key"), std::string::npos);
  const auto nested = error_of([] { io::parse_tube(json{{"k_list", {1, "x"}}, {"l_list", {1e-4}}}); },
                               ErrorCode::SchemaError);
  EXPECT_NE(nested.find("$.k_list[1]"), std::string::npos);
}

TEST(Io, SymplecticShapeAndValidity) {
  const auto m = io::parse_symplectic(json{{"genus", 1}, {"entries", {{2, 1}, {1, 1}}}}, "$");
  EXPECT_EQ(m.genus(), 1u);
  error_of([] { io::parse_symplectic(json{{"genus", 2}, {"entries", {{2, 1}, {1, 1}}}}, "$"); },
           ErrorCode::SchemaError);
  error_of([] { io::parse_symplectic(json{{"genus", 1}, {"entries", {{2, 1}, {1}}}}, "$"); }, ErrorCode::SchemaError);
  EXPECT_THROW(io::parse_symplectic(json{{"genus", 1}, {"entries", {{2, 0}, {0, 1}}}}, "$"), Error);
}

TEST(Io, AtomicWriteReplacesAndLeavesNoTemp) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "hypl2_io_test";
  fs::create_directories(dir);
  const fs::path f = dir / "r.json";
  io::write_atomic(f.string(), "first\n");
  io::write_atomic(f.string(), io::dump(json{{"b", 1}, {"a", 2}}));
  std::ifstream in(f);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
  EXPECT_FALSE(fs::exists(dir / "r.json.tmp"));
  fs::remove_all(dir);
  error_of([] { io::read_json("/nonexistent/in.json"); }, ErrorCode::IoError);
  error_of([] { io::write_atomic("/nonexistent/dir/out.json", "x"); }, ErrorCode::IoError);
}
