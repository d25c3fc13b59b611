#include "doctest.h"
#include "fixtures.hpp"

#include <sstream>

using namespace ddlyap;
using namespace fixtures;

TEST_SUITE("io") {

TEST_CASE("descriptor parsing") {
  auto sys = io::parse_system_text(R"({"n": 2, "entries": [
      {"delay": 1, "A": [[1, 2], [3, 4]]},
      {"delay": {"num": 3, "den": 2}, "A": [[0, 0], [0, 0.5]]},
      {"delay": 2.5, "A": [[0, 1], [0, 0]]}]})");
  CHECK(sys.dim() == 2);
  REQUIRE(sys.size() == 3);
  CHECK(sys.term(0).delay.rational() == Rational(1));
  CHECK(sys.term(1).delay.rational() == Rational(3, 2));
  CHECK_FALSE(sys.term(2).delay.is_rational());
  CHECK(sys.term(0).coeff(1, 0) == 3.0);
}

TEST_CASE("malformed descriptors") {
  auto code = [](const std::string& text) {
    try {
      io::parse_system_text(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("{") == ErrorCode::ParseError);
  CHECK(code(R"({"entries": []})") == ErrorCode::ParseError);
  CHECK(code(R"({"n": 1, "entries": [{"delay": 1}]})") == ErrorCode::ParseError);
  CHECK(code(R"({"n": 1, "entries": [{"delay": "x", "A": [[1]]}]})") == ErrorCode::ParseError);
  CHECK(code(R"({"n": 1, "entries": [{"delay": {"num": 1, "den": 0}, "A": [[1]]}]})") == ErrorCode::ParseError);
  CHECK(code(R"({"n": 2, "entries": [{"delay": 1, "A": [[1, 2], [3]]}]})") == ErrorCode::ParseError);
  CHECK(code(R"({"n": 2, "entries": [{"delay": 1, "A": [[1]]}]})") == ErrorCode::DimensionMismatch);
  // NaN is not valid JSON
  CHECK(code(R"({"n": 1, "entries": [{"delay": 1, "A": [[NaN]]}]})") == ErrorCode::ParseError);
}

TEST_CASE("initial function parsing") {
  auto phi = io::parse_initial_function(
      io::Json::parse(R"({"pieces": [{"start": -1, "value": [1]}, {"start": -0.5, "value": [0], "slope": [2]}]})"), 1.0, 1);
  CHECK(phi(-0.75)(0) == 1.0);
  CHECK(phi(-0.25)(0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(io::parse_initial_function(io::Json::parse(R"({"constant": [1, 2]})"), 1.0, 1), Error);
}

TEST_CASE("CSV layout") {
  auto u = build_lyapunov(validate(scalar(0.5)), WeightMatrix::identity(1));
  std::ostringstream ss;
  io::write_lyapunov_csv(ss, u, {-1.0, 0.0, 1.0});
  std::istringstream in(ss.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "tau,U11");
  std::getline(in, line);
  CHECK(line.rfind("-1,", 0) == 0);
  CHECK(std::stod(line.substr(line.find(',') + 1)) == doctest::Approx(-16.0 / 3.0));

  auto u2 = build_lyapunov(validate(twin_stable()), WeightMatrix::identity(2));
  std::ostringstream s2;
  io::write_lyapunov_csv(s2, u2, {0.0});
  CHECK(s2.str().rfind("tau,U11,U12,U21,U22\n", 0) == 0);
}

TEST_CASE("K and spectrum CSV headers") {
  auto v = validate(twin_stable());
  std::ostringstream k;
  io::write_step_csv(k, fundamental_matrix(v, 2.0));
  CHECK(k.str().rfind("t,K11,K12,K21,K22\n", 0) == 0);
  std::ostringstream sp;
  io::write_spectrum_csv(sp, jumps_from_segments(build_lyapunov(v, WeightMatrix::identity(2))), 2);
  CHECK(sp.str().rfind("tau,dU11,dU12,dU21,dU22,bound\n", 0) == 0);
}

TEST_CASE("round trip of doubles") {
  for (double x : {1.0 / 3.0, -8.0 / 3.0, 1e-300, 123456.789}) CHECK(std::stod(io::format_double(x)) == x);
}

TEST_CASE("report key order is stable") {
  ResidualReport r;
  auto j = io::to_json(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys.front() == "symmetry");
  CHECK(keys[1] == "dynamic");
  CHECK(keys[2] == "continuity");
}

}  // TEST_SUITE
