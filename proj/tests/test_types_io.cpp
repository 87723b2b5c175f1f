#include "hsi/keyval.hpp"
#include "hsi/matrix_io.hpp"
#include "hsi/types.hpp"

#include "doctest.h"
#include "util.hpp"

#include <cmath>
#include <limits>
#include <random>

using hsi::ConfigError;
using hsi::DataError;
using hsi::Matrix;

TEST_CASE("spectral image validates shape and content") {
  CHECK_NOTHROW(hsi::SpectralImage(Matrix::Constant(2, 1, 0.5)));
  CHECK_THROWS_AS(hsi::SpectralImage(Matrix::Constant(1, 4, 0.5)), DataError);
  CHECK_THROWS_AS(hsi::SpectralImage(Matrix(3, 0)), DataError);

  Matrix bad = Matrix::Constant(3, 2, 0.5);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hsi::SpectralImage{bad}, DataError);

  hsi::SpectralImage img(Matrix::Constant(4, 6, 0.25), hsi::Layout{3, 2});
  CHECK(img.bands() == 4);
  CHECK(img.pixels() == 6);
  REQUIRE(img.layout().has_value());
  CHECK(img.layout()->width == 3);
  CHECK(img.layout()->height == 2);
  CHECK_THROWS_AS(hsi::SpectralImage(Matrix::Constant(4, 6, 0.25), hsi::Layout{4, 2}),
                  DataError);
  CHECK_THROWS_AS(hsi::SpectralImage(Matrix::Constant(4, 6, 0.25), hsi::Layout{0, 6}),
                  DataError);
}

TEST_CASE("endmember dictionary validates columns") {
  Matrix sig = Matrix::Constant(5, 3, 0.4);
  CHECK_NOTHROW(hsi::EndmemberDictionary{sig});
  CHECK_THROWS_AS(hsi::EndmemberDictionary(Matrix(0, 3)), DataError);

  Matrix with_nan = sig;
  with_nan(2, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hsi::EndmemberDictionary{with_nan}, DataError);

  Matrix with_zero = sig;
  with_zero.col(1).setZero();
  CHECK_THROWS_WITH_AS(hsi::EndmemberDictionary{with_zero},
                       doctest::Contains("atom 1"), DataError);
}

TEST_CASE("group structure membership and contiguity") {
  hsi::GroupStructure groups(3, {0, 0, 1, 2, 2, 2});
  CHECK(groups.group_count() == 3);
  CHECK(groups.atom_count() == 6);
  CHECK(groups.group_of(0) == 0);
  CHECK(groups.group_of(5) == 2);
  CHECK(groups.group_size(0) == 2);
  CHECK(groups.group_size(1) == 1);
  CHECK(groups.group_size(2) == 3);
  CHECK(groups.members(2) == std::vector<int>{3, 4, 5});
  CHECK(groups.contiguous());

  hsi::GroupStructure scattered(2, {0, 1, 0});
  CHECK_FALSE(scattered.contiguous());

  CHECK_THROWS_AS(hsi::GroupStructure(0, {0}), DataError);
  CHECK_THROWS_AS(hsi::GroupStructure(2, {}), DataError);
  CHECK_THROWS_AS(hsi::GroupStructure(2, {0, 2}), DataError);
  CHECK_THROWS_AS(hsi::GroupStructure(2, {0, -1}), DataError);
  CHECK_THROWS_WITH_AS(hsi::GroupStructure(3, {0, 0, 2}),
                       doctest::Contains("group 2"), DataError);
}

TEST_CASE("group indicator matrix has one 1 per atom column") {
  hsi::GroupStructure groups(2, {0, 1, 0, 1});
  Matrix m = groups.indicator_matrix();
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 4);
  for (int atom = 0; atom < 4; ++atom) {
    CHECK(m.col(atom).sum() == 1.0);
    CHECK(m(groups.group_of(atom), atom) == 1.0);
  }
  CHECK(m.row(0).sum() == 2.0);
  CHECK(m.row(1).sum() == 2.0);
}

TEST_CASE("abundance matrix tolerates tiny negatives only") {
  Matrix a(2, 2);
  a << 0.6, 0.3, 0.4, 0.7;
  hsi::AbundanceMatrix ok(a, hsi::AbundanceMode::collapsed);
  CHECK(ok.rows() == 2);
  CHECK(ok.pixels() == 2);
  CHECK(ok.max_sum_to_one_error() == doctest::Approx(0.0).epsilon(1e-15));

  Matrix slack = a;
  slack(0, 0) = -0.5e-9;
  CHECK_NOTHROW(hsi::AbundanceMatrix(slack, hsi::AbundanceMode::collapsed));

  Matrix below = a;
  below(0, 0) = -1e-6;
  CHECK_THROWS_AS(hsi::AbundanceMatrix(below, hsi::AbundanceMode::collapsed), DataError);

  Matrix off(2, 1);
  off << 0.5, 0.7;
  CHECK(hsi::AbundanceMatrix(off, hsi::AbundanceMode::per_atom).max_sum_to_one_error() ==
        doctest::Approx(0.2));
}

TEST_CASE("penalty names round-trip") {
  for (hsi::Penalty p : {hsi::Penalty::none, hsi::Penalty::l1,
                         hsi::Penalty::collaborative, hsi::Penalty::group,
                         hsi::Penalty::elitist, hsi::Penalty::fractional}) {
    CHECK(hsi::penalty_from_name(hsi::penalty_name(p)) == p);
  }
  CHECK_THROWS_AS(hsi::penalty_from_name("ridge"), ConfigError);
  CHECK(hsi::penalty_needs_groups(hsi::Penalty::group));
  CHECK(hsi::penalty_needs_groups(hsi::Penalty::elitist));
  CHECK(hsi::penalty_needs_groups(hsi::Penalty::fractional));
  CHECK_FALSE(hsi::penalty_needs_groups(hsi::Penalty::none));
  CHECK_FALSE(hsi::penalty_needs_groups(hsi::Penalty::l1));
  CHECK_FALSE(hsi::penalty_needs_groups(hsi::Penalty::collaborative));
}

TEST_CASE("solver config validation") {
  hsi::SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  hsi::SolverConfig bad = cfg;
  bad.lambda = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.lambda = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.rho = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.penalty = hsi::Penalty::fractional;
  bad.fraction = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.fraction = 0.5;
  CHECK_NOTHROW(bad.validate());
  bad = cfg;
  bad.max_iter = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.rel_tol = -1e-9;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("binary matrix round-trip is bit exact") {
  testutil::TempDir dir;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 3.0);
  Matrix m(128, 64);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = dist(rng);
    }
  }
  m(0, 0) = 0.0;
  m(1, 0) = -0.0;
  m(2, 0) = 1e-300;
  m(3, 0) = -1e300;
  m(4, 0) = 0.1;

  const std::string path = dir.file("m.bin");
  hsi::write_matrix_bin(path, m);
  const Matrix back = hsi::read_matrix_bin(path);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK((back.array() == m.array()).all());
  CHECK(std::signbit(back(1, 0)));

  hsi::write_matrix_bin(dir.file("again.bin"), back);
  CHECK(testutil::read_bytes(path) == testutil::read_bytes(dir.file("again.bin")));
}

TEST_CASE("binary matrix errors name the problem") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(hsi::read_matrix_bin(dir.file("absent.bin")), DataError);

  Matrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  const std::string path = dir.file("m.bin");
  hsi::write_matrix_bin(path, m);

  std::string bytes = testutil::read_bytes(path);
  REQUIRE(bytes.size() == 21 + 6 * 8);
  testutil::write_text(dir.file("trunc.bin"), bytes.substr(0, 21 + 13));
  CHECK_THROWS_WITH_AS(hsi::read_matrix_bin(dir.file("trunc.bin")),
                       doctest::Contains("expected 48 bytes, got 13"), DataError);

  testutil::write_text(dir.file("short.bin"), bytes.substr(0, 10));
  CHECK_THROWS_WITH_AS(hsi::read_matrix_bin(dir.file("short.bin")),
                       doctest::Contains("truncated header"), DataError);

  std::string wrong = bytes;
  wrong[0] = 'X';
  testutil::write_text(dir.file("magic.bin"), wrong);
  CHECK_THROWS_WITH_AS(hsi::read_matrix_bin(dir.file("magic.bin")),
                       doctest::Contains("bad magic"), DataError);

  std::string vers = bytes;
  vers[4] = 0x02;
  testutil::write_text(dir.file("vers.bin"), vers);
  CHECK_THROWS_WITH_AS(hsi::read_matrix_bin(dir.file("vers.bin")),
                       doctest::Contains("unsupported version 2"), DataError);
}

TEST_CASE("csv matrix round-trip preserves values") {
  testutil::TempDir dir;
  Matrix m(2, 3);
  m << 0.1, -2.5e-7, 3.0, 1.0 / 3.0, -0.0, 12345.678901234567;
  const std::string path = dir.file("m.csv");
  hsi::write_matrix_csv(path, m);
  const Matrix back = hsi::read_matrix_csv(path);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK((back.array() == m.array()).all());
}

TEST_CASE("csv matrix parse errors carry locations") {
  testutil::TempDir dir;
  testutil::write_text(dir.file("bad.csv"), "1,2\n3,oops\n");
  CHECK_THROWS_WITH_AS(hsi::read_matrix_csv(dir.file("bad.csv")),
                       doctest::Contains("line 2, field 2"), DataError);

  testutil::write_text(dir.file("ragged.csv"), "1,2\n3\n");
  CHECK_THROWS_WITH_AS(hsi::read_matrix_csv(dir.file("ragged.csv")),
                       doctest::Contains("line 2 has 1 fields, expected 2"), DataError);

  testutil::write_text(dir.file("empty.csv"), "\n\n");
  CHECK_THROWS_AS(hsi::read_matrix_csv(dir.file("empty.csv")), DataError);
}

TEST_CASE("matrix reader dispatches on extension") {
  testutil::TempDir dir;
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  hsi::write_matrix(dir.file("a.bin"), m);
  hsi::write_matrix(dir.file("a.csv"), m);
  CHECK((hsi::read_matrix(dir.file("a.bin")).array() == m.array()).all());
  CHECK((hsi::read_matrix(dir.file("a.csv")).array() == m.array()).all());
  CHECK_THROWS_AS(hsi::read_matrix(dir.file("a.txt")), DataError);
  CHECK_THROWS_AS(hsi::write_matrix(dir.file("a.txt"), m), DataError);
}

TEST_CASE("group files round-trip with 1-based ids") {
  testutil::TempDir dir;
  hsi::GroupStructure groups(3, {0, 1, 1, 2, 0});
  const std::string path = dir.file("groups.txt");
  hsi::write_groups(path, groups);
  const hsi::GroupStructure back = hsi::read_groups(path);
  CHECK(back.group_count() == 3);
  CHECK(back.assignment() == groups.assignment());

  testutil::write_text(dir.file("spaced.txt"), "# header\n 1 \n\n2\n# mid\n1\n");
  const hsi::GroupStructure spaced = hsi::read_groups(dir.file("spaced.txt"));
  CHECK(spaced.group_count() == 2);
  CHECK(spaced.assignment() == std::vector<int>{0, 1, 0});

  testutil::write_text(dir.file("zero.txt"), "1\n0\n");
  CHECK_THROWS_WITH_AS(hsi::read_groups(dir.file("zero.txt")),
                       doctest::Contains("line 2"), DataError);
  testutil::write_text(dir.file("word.txt"), "first\n");
  CHECK_THROWS_AS(hsi::read_groups(dir.file("word.txt")), DataError);
  testutil::write_text(dir.file("none.txt"), "# only comments\n");
  CHECK_THROWS_AS(hsi::read_groups(dir.file("none.txt")), DataError);
  testutil::write_text(dir.file("gap.txt"), "1\n3\n");
  CHECK_THROWS_AS(hsi::read_groups(dir.file("gap.txt")), DataError);
}

TEST_CASE("keyval parsing trims, skips comments, rejects duplicates") {
  const auto pairs = hsi::keyval::parse_text(
      "# leading comment\n"
      "  alpha = 1.5  \n"
      "beta=text value # trailing note\n"
      "\n"
      "gamma =\n",
      "test");
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].first == "alpha");
  CHECK(pairs[0].second == "1.5");
  CHECK(pairs[1].first == "beta");
  CHECK(pairs[1].second == "text value");
  CHECK(pairs[2].first == "gamma");
  CHECK(pairs[2].second == "");

  CHECK_THROWS_WITH_AS(hsi::keyval::parse_text("a=1\na=2\n", "test"),
                       doctest::Contains("duplicate key 'a'"), ConfigError);
  CHECK_THROWS_WITH_AS(hsi::keyval::parse_text("just words\n", "test"),
                       doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_AS(hsi::keyval::parse_text("=5\n", "test"), ConfigError);
}

TEST_CASE("keyval files round-trip") {
  testutil::TempDir dir;
  hsi::keyval::Pairs pairs = {{"solver", "group"}, {"lambda", "0.25"}};
  const std::string path = dir.file("cfg.txt");
  hsi::keyval::write_file(path, pairs);
  CHECK(hsi::keyval::parse_file(path) == pairs);
  CHECK_THROWS_AS(hsi::keyval::parse_file(dir.file("missing.txt")), ConfigError);
}

TEST_CASE("keyval typed conversions") {
  CHECK(hsi::keyval::to_double("k", "2.5e-3") == 2.5e-3);
  CHECK(hsi::keyval::to_double("k", "inf") ==
        std::numeric_limits<double>::infinity());
  CHECK_THROWS_WITH_AS(hsi::keyval::to_double("k", "1.5x"),
                       doctest::Contains("key 'k'"), ConfigError);
  CHECK_THROWS_AS(hsi::keyval::to_double("k", ""), ConfigError);

  CHECK(hsi::keyval::to_int("k", "-12") == -12);
  CHECK_THROWS_AS(hsi::keyval::to_int("k", "1.5"), ConfigError);
  CHECK_THROWS_AS(hsi::keyval::to_int("k", "99999999999999999999"), ConfigError);

  CHECK(hsi::keyval::to_uint64("k", "18446744073709551615") ==
        std::numeric_limits<std::uint64_t>::max());
  CHECK_THROWS_AS(hsi::keyval::to_uint64("k", "-3"), ConfigError);

  CHECK(hsi::keyval::to_bool("k", "true"));
  CHECK(hsi::keyval::to_bool("k", "1"));
  CHECK_FALSE(hsi::keyval::to_bool("k", "false"));
  CHECK_FALSE(hsi::keyval::to_bool("k", "0"));
  CHECK_THROWS_AS(hsi::keyval::to_bool("k", "yes"), ConfigError);
}

TEST_CASE("format_double survives a parse round-trip") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
    const std::string s = hsi::keyval::format_double(v);
    CHECK(hsi::keyval::to_double("k", s) == v);
  }
}
