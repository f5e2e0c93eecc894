#include <doctest.h>

#include <set>

#include "netreg/errors.hpp"
#include "netreg/instruments.hpp"
#include "netreg/transforms.hpp"
#include "oracles.hpp"

using namespace netreg;

namespace {

struct Fixture {
  GroupedNetwork net;
  BlockDiagonal J;
  MatrixXd X;
};

Fixture mc_fixture(std::uint64_t seed, Index groups = 6, Index size = 10, Index links = 3) {
  Rng rng(seed);
  Fixture f{generate_mc_network(groups, size, links, rng), {}, {}};
  f.J = j_projector(f.net.M);
  f.X.resize(f.net.size(), 2);
  for (Index i = 0; i < f.X.rows(); ++i) {
    f.X(i, 0) = rng.normal();
    f.X(i, 1) = rng.normal();
  }
  return f;
}

double max_variance_error(const MatrixXd& Q) {
  double worst = 0.0;
  for (Index j = 0; j < Q.cols(); ++j) {
    const VectorXd c = Q.col(j).array() - Q.col(j).mean();
    worst = std::max(worst, std::abs(c.squaredNorm() / static_cast<double>(Q.rows() - 1) - 1.0));
  }
  return worst;
}

}  // namespace

TEST_CASE("first-order instruments are J[WX, X]") {
  const Fixture f = mc_fixture(1);
  InstrumentOptions opt;
  const InstrumentSet q = build_instruments(f.net, f.J, f.X, {"x1", "x2"}, opt);
  MatrixXd expect(f.X.rows(), 4);
  expect << f.net.W.dense() * f.X, f.X;
  expect = f.J.dense() * expect;
  REQUIRE(q.cols() == 4);
  CHECK((q.Q - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(q.labels == std::vector<std::string>{"J*W*x1", "J*W*x2", "J*x1", "J*x2"});
}

TEST_CASE("higher order, Bonacich and M-lag columns follow the stated layout") {
  const Fixture f = mc_fixture(2);
  InstrumentOptions opt;
  opt.order = 3;
  opt.include_bonacich = true;
  opt.bonacich_per_group = false;
  opt.include_m_lags = true;
  const InstrumentSet q = build_instruments(f.net, f.J, f.X, {"a", "b"}, opt);
  const MatrixXd W = f.net.W.dense(), M = f.net.M.dense(), J = f.J.dense();
  const VectorXd iota = VectorXd::Ones(f.X.rows());
  MatrixXd Q0(f.X.rows(), 11);
  Q0 << W * f.X, W * W * f.X, W * W * W * f.X, W * iota, W * W * iota, W * W * W * iota, f.X;
  MatrixXd full(f.X.rows(), 22);
  full << Q0, M * Q0;
  full = J * full;
  // Compare on the kept columns, matched by label order.
  std::vector<std::string> all_labels;
  for (const char* p : {"", "M*"}) {
    for (const char* s : {"W*a", "W*b", "W^2*a", "W^2*b", "W^3*a", "W^3*b", "W*iota", "W^2*iota",
                          "W^3*iota", "a", "b"}) {
      all_labels.push_back(std::string("J*") + p + s);
    }
  }
  Index c = 0;
  for (Index j = 0; j < 22; ++j) {
    const auto& l = all_labels[static_cast<std::size_t>(j)];
    if (c < q.cols() && q.labels[static_cast<std::size_t>(c)] == l) {
      CHECK((q.Q.col(c) - full.col(j)).norm() < 1e-10);
      ++c;
    } else {
      CHECK(full.col(j).norm() < 1e-8 * full.cwiseAbs().maxCoeff() * std::sqrt(full.rows()));
    }
  }
  CHECK(c == q.cols());
}

TEST_CASE("instruments are fixed points of J and labels biject with columns") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Fixture f = mc_fixture(seed, 5, 10, seed % 2 ? 3 : 6);
    InstrumentOptions opt;
    opt.order = 1 + static_cast<Index>(seed % 4);
    opt.include_bonacich = seed % 2 == 0;
    opt.include_m_lags = seed % 3 == 0;
    const InstrumentSet q = build_instruments(f.net, f.J, f.X, {"x1", "x2"}, opt);
    CHECK((f.J.apply(q.Q) - q.Q).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(static_cast<Index>(q.labels.size()) == q.cols());
    CHECK(std::set<std::string>(q.labels.begin(), q.labels.end()).size() == q.labels.size());
    for (Index j = 0; j < q.cols(); ++j) CHECK(q.Q.col(j).norm() > 0.0);

    const InstrumentSet u = normalize_columns(q, Normalization::UnitVariance);
    CHECK((f.J.apply(u.Q) - u.Q).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(max_variance_error(u.Q) < 1e-10);
  }
}

TEST_CASE("simulation rosters: Q1 = J[x, Wx, Mx, MWx] and Q2 adds J W iota per group") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const Fixture f = mc_fixture(seed);
    const InstrumentSet q1 = mc_q1(f.net, f.J, f.X.col(0), f.X.col(1));
    const MatrixXd W = f.net.W.dense(), M = f.net.M.dense();
    MatrixXd expect(f.X.rows(), 8);
    expect << f.X, W * f.X, M * f.X, M * W * f.X;
    expect = f.J.dense() * expect;
    REQUIRE(q1.cols() == 8);
    CHECK((q1.Q - expect).cwiseAbs().maxCoeff() < 1e-12);

    const InstrumentSet q2 = mc_q2(f.net, f.J, q1);
    CHECK(q2.Q.leftCols(8) == q1.Q);
    // One extra column for each group whose J W ι_r survives.
    const MatrixXd B = f.J.dense() * W * group_indicators(f.net);
    Index live = 0;
    for (Index r = 0; r < B.cols(); ++r)
      if (B.col(r).norm() > 1e-10 * std::max(1.0, B.cwiseAbs().maxCoeff())) ++live;
    CHECK(q2.cols() == q1.cols() + live);
    CHECK(static_cast<Index>(q2.labels.size()) == q2.cols());
  }
}

TEST_CASE("constant column is dropped under standardization") {
  InstrumentSet s;
  s.Q.resize(4, 2);
  s.Q << 5, 1, 5, 2, 5, 3, 5, 5;
  s.labels = {"const", "x"};
  const InstrumentSet out = normalize_columns(s, Normalization::Standardized);
  REQUIRE(out.cols() == 1);
  CHECK(out.labels[0] == "x");
  CHECK(out.dropped == std::vector<std::string>{"const"});
  CHECK(std::abs(out.Q.col(0).mean()) < 1e-14);
}

TEST_CASE("unit-variance scaling of [1, 2, 3] gives sample sd 1") {
  InstrumentSet s;
  s.Q.resize(3, 1);
  s.Q << 1, 2, 3;
  s.labels = {"x"};
  const InstrumentSet out = normalize_columns(s, Normalization::UnitVariance);
  CHECK(max_variance_error(out.Q) < 1e-12);
  CHECK(out.Q(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("normalization leaves the column span unchanged") {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 20; ++trial) {
    InstrumentSet s;
    s.Q = oracle::random_matrix(g, 25, 4) * std::exp(std::uniform_real_distribution<double>(-4, 4)(g));
    s.Q.col(1) *= 1e3;
    s.labels = {"a", "b", "c", "d"};
    const InstrumentSet u = normalize_columns(s, Normalization::UnitVariance);
    CHECK((oracle::projector(u.Q) - oracle::projector(s.Q)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("zero columns are dropped with their labels") {
  InstrumentSet s;
  s.Q = MatrixXd::Zero(5, 3);
  s.Q.col(0).setOnes();
  s.Q(2, 2) = 1e-14;
  s.labels = {"a", "zero", "tiny"};
  const InstrumentSet out = drop_zero_columns(s);
  CHECK(out.labels == std::vector<std::string>{"a"});
  CHECK(out.dropped == std::vector<std::string>{"zero", "tiny"});
}

TEST_CASE("invalid order and mismatched rows are rejected") {
  const Fixture f = mc_fixture(3);
  InstrumentOptions opt;
  opt.order = 0;
  CHECK_THROWS_AS(build_instruments(f.net, f.J, f.X, {}, opt), InputError);
  opt.order = 1;
  CHECK_THROWS_AS(build_instruments(f.net, f.J, MatrixXd::Ones(3, 1), {}, opt), InputError);
}
