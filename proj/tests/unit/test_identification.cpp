#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "netreg/errors.hpp"
#include "netreg/identification.hpp"
#include "netreg/instruments.hpp"
#include "netreg/transforms.hpp"
#include "oracles.hpp"

using namespace netreg;

namespace {

MatrixXd complete(Index m) { return MatrixXd::Ones(m, m) - MatrixXd::Identity(m, m); }

MatrixXd path(Index m) {
  MatrixXd P = MatrixXd::Zero(m, m);
  for (Index i = 0; i + 1 < m; ++i) P(i, i + 1) = P(i + 1, i) = 1.0;
  return P;
}

MatrixXd random_symmetric(std::mt19937_64& g, Index m) {
  const MatrixXd A = oracle::random_matrix(g, m, m);
  return 0.5 * (A + A.transpose());
}

}  // namespace

TEST_CASE("complete graph K4 has eigenvalues 3 and -1 (x3)") {
  const DistinctEigenvalues d = distinct_eigenvalues(complete(4));
  REQUIRE(d.count == 2);
  CHECK(d.clusters[0].value == doctest::Approx(3.0));
  CHECK(d.clusters[0].multiplicity == 1);
  CHECK(d.clusters[1].value == doctest::Approx(-1.0));
  CHECK(d.clusters[1].multiplicity == 3);
}

TEST_CASE("Lee matrix with groups 5 and 7 has distinct eigenvalues 1, -1/4, -1/6") {
  const DistinctEigenvalues d = distinct_eigenvalues(lee_block_matrix({5, 7}));
  REQUIRE(d.count == 3);
  CHECK(std::abs(d.clusters[0].value - 1.0) < 1e-10);
  CHECK(std::abs(d.clusters[1].value + 1.0 / 6.0) < 1e-10);
  CHECK(std::abs(d.clusters[2].value + 1.0 / 4.0) < 1e-10);
  CHECK(d.clusters[0].multiplicity == 2);
  CHECK(d.clusters[1].multiplicity == 6);
  CHECK(d.clusters[2].multiplicity == 4);
}

TEST_CASE("equal-size Lee groups are not identified") {
  const BlockDiagonal W = lee_block_matrix({10, 10});
  CHECK(distinct_eigenvalues(W).count == 2);
  CHECK(proposition1_check(W) == Verdict::NotIdentified);
}

TEST_CASE("complete graphs K3..K20 are not identified") {
  for (Index n = 3; n <= 20; ++n) {
    CHECK(proposition1_check(complete(n)) == Verdict::NotIdentified);
    CHECK(distinct_eigenvalues(complete(n)).count == 2);
  }
}

TEST_CASE("K5 is not identified") { CHECK(proposition1_check(complete(5)) == Verdict::NotIdentified); }

TEST_CASE("path graph P4 has four distinct eigenvalues") {
  const DistinctEigenvalues d = distinct_eigenvalues(path(4));
  CHECK(d.count == 4);
  CHECK(oracle::count_distinct(oracle::jacobi_eigenvalues(path(4)), 1e-8L) == 4);
  CHECK(proposition1_check(path(4)) == Verdict::PossiblyIdentified);
}

TEST_CASE("distinct counts agree with a long-double Jacobi oracle") {
  std::mt19937_64 g(101);
  for (int trial = 0; trial < 30; ++trial) {
    MatrixXd A = random_symmetric(g, 8);
    if (trial % 3 == 0) A = complete(8) + 0.0 * A;  // repeated eigenvalues
    if (trial % 3 == 1) {
      // Rank-2 matrix: zero eigenvalue with multiplicity 6.
      const MatrixXd u = oracle::random_matrix(g, 8, 2);
      A = u * u.transpose();
    }
    const DistinctEigenvalues d = distinct_eigenvalues(A);
    const auto ev = oracle::jacobi_eigenvalues(A);
    CHECK(d.count == oracle::count_distinct(ev, 1e-8L));
    Index total = 0;
    for (const auto& c : d.clusters) total += c.multiplicity;
    CHECK(total == 8);
  }
}

TEST_CASE("distinct eigenvalues are invariant to simultaneous permutation") {
  std::mt19937_64 g(103);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd A = trial % 2 ? random_symmetric(g, 9) : lee_block_matrix({4, 5}).dense();
    std::vector<int> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(9);
    for (int i = 0; i < 9; ++i) P.indices()(i) = perm[static_cast<std::size_t>(i)];
    const MatrixXd B = P * A * P.transpose();
    const DistinctEigenvalues a = distinct_eigenvalues(A), b = distinct_eigenvalues(B);
    REQUIRE(a.count == b.count);
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
      CHECK(a.clusters[i].value == doctest::Approx(b.clusters[i].value).epsilon(1e-10));
      CHECK(a.clusters[i].multiplicity == b.clusters[i].multiplicity);
    }
  }
}

TEST_CASE("block spectrum is the union of the block spectra") {
  std::mt19937_64 g(107);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<MatrixXd> blocks{random_symmetric(g, 3), complete(4), path(5)};
    const BlockDiagonal B(blocks);
    std::vector<long double> all;
    for (const auto& b : blocks) {
      const auto ev = oracle::jacobi_eigenvalues(b);
      all.insert(all.end(), ev.begin(), ev.end());
    }
    CHECK(distinct_eigenvalues(B).count == oracle::count_distinct(all, 1e-8L));
    CHECK(distinct_eigenvalues(B).count == distinct_eigenvalues(B.dense()).count);
  }
}

TEST_CASE("asymmetric input is rejected with its asymmetry") {
  MatrixXd A = complete(3);
  A(0, 1) = 0.0;
  try {
    (void)distinct_eigenvalues(A);
    FAIL("expected rejection");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("not symmetric") != std::string::npos);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("rank check on K_n stacks is deficient") {
  std::mt19937_64 g(109);
  for (Index n = 3; n <= 10; ++n) {
    const GroupedNetwork net = GroupedNetwork::with_m_equal_w(BlockDiagonal({complete(n)}));
    const MatrixXd X = oracle::random_matrix(g, n, 2);
    const RankCheck rc = proposition2_rank_check(net, X, true);
    CHECK_FALSE(rc.full_rank);
    CHECK(rc.rank == oracle::rank_of((MatrixXd(n, 4) << complete(n) * X, X).finished()));
  }
}

TEST_CASE("Lee groups (4, 5, 6) with iid X give a full-rank stack") {
  std::mt19937_64 g(113);
  const GroupedNetwork net = GroupedNetwork::with_m_equal_w(lee_block_matrix({4, 5, 6}));
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd X = oracle::random_matrix(g, 15, 2);
    const RankCheck rc = proposition2_rank_check(net, X, true);
    const MatrixXd W = net.W.dense();
    // Four distinct eigenvalues (1, -1/3, -1/4, -1/5): powers up to W^3.
    MatrixXd stack(15, 8);
    stack << W * X, W * W * X, W * W * W * X, X;
    CHECK(rc.full_rank);
    CHECK(rc.columns == 8);
    CHECK(oracle::rank_of(stack) == 8);
    CHECK(std::isfinite(rc.condition_number));
  }
}

TEST_CASE("rank flag is unchanged by scaling X") {
  std::mt19937_64 g(127);
  const GroupedNetwork net = GroupedNetwork::with_m_equal_w(lee_block_matrix({4, 5, 6}));
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd X = oracle::random_matrix(g, 15, 1);
    const double c = std::exp(std::uniform_real_distribution<double>(-5, 5)(g));
    CHECK(proposition2_rank_check(net, X, true).full_rank ==
          proposition2_rank_check(net, c * X, true).full_rank);
    CHECK(proposition2_rank_check(net, X, false).full_rank ==
          proposition2_rank_check(net, c * X, false).full_rank);
  }
}

TEST_CASE("empty regressor stack is rejected") {
  const GroupedNetwork net = GroupedNetwork::with_m_equal_w(lee_block_matrix({4, 5}));
  CHECK_THROWS_AS(proposition2_rank_check(net, MatrixXd(9, 0), true), InputError);
}

TEST_CASE("larger lag stacks have larger condition numbers") {
  std::mt19937_64 g(131);
  std::vector<MatrixXd> blocks;
  for (int r = 0; r < 12; ++r) {
    MatrixXd A = oracle::random_adjacency(g, 12, 0.25);
    A = ((A + A.transpose()).array() > 0.0).cast<double>().matrix();
    blocks.push_back(A);
  }
  const GroupedNetwork net = GroupedNetwork::with_row_normalized_m(BlockDiagonal(blocks));
  const MatrixXd X = oracle::random_matrix(g, net.size(), 3);
  const BlockDiagonal J = j_projector(net.M);
  double prev = 0.0;
  for (Index order : {2, 3, 4}) {
    InstrumentOptions opt;
    opt.order = order;
    const InstrumentSet q = build_instruments(net, J, X, {"a", "b", "c"}, opt);
    const double cond = rank_check(q.Q).condition_number;
    CHECK(cond > prev);
    prev = cond;
  }
}

TEST_CASE("Lee reduced coefficient") {
  CHECK(lee_reduced_coefficient(10, 0.1, 0.0, 0.0) == 0.0);
  CHECK(lee_reduced_coefficient(10, 0.1, 0.2, 0.2) == doctest::Approx(1.6 / 9.1));
  const double a = lee_reduced_coefficient(10, 0.1, 0.2, 0.2);
  const double b = lee_reduced_coefficient(100, 0.1, 0.2, 0.2);
  const double c = lee_reduced_coefficient(1000, 0.1, 0.2, 0.2);
  CHECK(std::abs(c - b) < std::abs(b - a));
  // Distance to beta1 is |lambda beta1 + beta2| / (m - 1 + lambda).
  CHECK(std::abs(c - 0.2) == doctest::Approx(0.22 / 999.1));
  CHECK_THROWS_AS(lee_reduced_coefficient(1, 0.1, 0.2, 0.2), InputError);
  CHECK_THROWS_AS(lee_reduced_coefficient(2, -1.0, 0.2, 0.2), NumericalError);
}

TEST_CASE("diagnose report text and key-value forms") {
  const GroupedNetwork k5 = GroupedNetwork::with_m_equal_w(BlockDiagonal({complete(5)}));
  const IdentificationReport rep = diagnose(k5, MatrixXd(5, 0));
  std::ostringstream text, kv;
  rep.print_text(text);
  rep.print_kv(kv);
  CHECK(text.str().rfind("NotIdentified (2 distinct eigenvalues)\n", 0) == 0);
  CHECK(kv.str().find("verdict=NotIdentified") != std::string::npos);
  CHECK(kv.str().find("distinct_eigenvalue_count=2") != std::string::npos);

  std::mt19937_64 g(137);
  const GroupedNetwork lee = GroupedNetwork::with_m_equal_w(lee_block_matrix({4, 5, 6}));
  const IdentificationReport ok = diagnose(lee, oracle::random_matrix(g, 15, 1));
  CHECK((ok.verdict == Verdict::Identified || ok.verdict == Verdict::WeaklyIdentified));
  REQUIRE(ok.stack.has_value());
  CHECK(ok.stack->full_rank);
  Index total = 0;
  for (const auto& c : ok.eigen.clusters) total += c.multiplicity;
  CHECK(total == 15);
}
