#include <doctest.h>

#include "netreg/errors.hpp"
#include "netreg/estimation.hpp"
#include "netreg/montecarlo.hpp"
#include "netreg/transforms.hpp"
#include "oracles.hpp"

using namespace netreg;

namespace {

McConfig small_config(double sigma2 = 1.0) {
  McConfig c;
  c.group_count = 8;
  c.group_size = 10;
  c.max_links = 3;
  c.sigma2 = sigma2;
  return c;
}

struct Setup {
  std::unique_ptr<EstimationProblem> prob;
  InstrumentSet q1, q2;
};

Setup setup(const McConfig& c, std::uint64_t r) {
  McDraw d = draw_replication(c, r);
  Setup s;
  s.prob = std::make_unique<EstimationProblem>(d.net, std::move(d.data));
  const auto& p = *s.prob;
  s.q1 = mc_q1(p.network(), p.J(), p.data().x1.col(0), p.data().x2.col(0));
  s.q2 = mc_q2(p.network(), p.J(), s.q1);
  return s;
}

std::shared_ptr<const Spectrum> spectrum_of(const MatrixXd& Q) {
  return std::make_shared<const Spectrum>(Spectrum::from_instruments(Q));
}

}  // namespace

TEST_CASE("problem assembles Z = (WY, X1, W X2) and names") {
  const Setup s = setup(small_config(), 0);
  const auto& p = *s.prob;
  const MatrixXd W = p.network().W.dense();
  CHECK((p.Z().col(0) - W * p.y()).norm() < 1e-12);
  CHECK((p.Z().col(1) - p.data().x1.col(0)).norm() == 0.0);
  CHECK((p.Z().col(2) - W * p.data().x2.col(0)).norm() < 1e-12);
  CHECK(p.coefficient_names() == std::vector<std::string>{"lambda", "x1", "W*x2"});
}

TEST_CASE("preliminary delta matches the textbook IV chain") {
  for (std::uint64_t r = 0; r < 10; ++r) {
    const Setup s = setup(small_config(), r);
    const VectorXd got = preliminary_delta(*s.prob, s.q1);
    const VectorXd expect = oracle::tsls(s.q1.Q, s.prob->Z(), s.prob->y());
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("noiseless data recover the true parameters") {
  const McConfig c = small_config(0.0);
  for (std::uint64_t r = 0; r < 5; ++r) {
    const Setup s = setup(c, r);
    const VectorXd d = preliminary_delta(*s.prob, s.q1);
    CHECK((d - c.truth()).cwiseAbs().maxCoeff() < 1e-8);

    const RhoEstimate rho = preliminary_rho(*s.prob, d);
    CHECK(rho.degenerate);
    CHECK(rho.rho == 0.0);

    const InstrumentSet qn = normalize_columns(s.q2, Normalization::UnitVariance);
    const RegularizedProjector T(spectrum_of(qn.Q), Scheme::tikhonov(1e-8));
    CHECK((regularized_2sls(*s.prob, T, c.rho).delta - c.truth()).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("PC with every component equals classical 2SLS on the R-transformed data") {
  for (std::uint64_t r = 0; r < 20; ++r) {
    const Setup s = setup(small_config(), r);
    const double rho = 0.05 * static_cast<double>(r % 5);
    const RegularizedProjector P(spectrum_of(s.q2.Q), Scheme::full_projection());
    const EstimationResult reg = regularized_2sls(*s.prob, P, rho);
    const EstimationResult cls = classical_2sls(*s.prob, s.q2, rho);
    const VectorXd oracle_delta =
        oracle::tsls(s.q2.Q, s.prob->r_apply(rho, s.prob->Z()), s.prob->r_apply(rho, s.prob->y()));
    CHECK((reg.delta - cls.delta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((reg.delta - oracle_delta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(reg.sigma2_hat >= 0.0);
    CHECK(reg.std_errors.allFinite());
    CHECK(cls.estimator == "2SLS");
  }
}

TEST_CASE("residual variance uses the transformed residual divided by n") {
  const Setup s = setup(small_config(), 3);
  const RegularizedProjector P(spectrum_of(s.q2.Q), Scheme::tikhonov(0.01));
  const double rho = 0.1;
  const EstimationResult res = regularized_2sls(*s.prob, P, rho);
  const MatrixXd J = s.prob->J().dense(), M = s.prob->network().M.dense();
  const Index n = s.prob->n();
  const VectorXd e = J * (MatrixXd::Identity(n, n) - rho * M) * (s.prob->y() - s.prob->Z() * res.delta);
  CHECK(res.sigma2_hat == doctest::Approx(e.squaredNorm() / static_cast<double>(n)).epsilon(1e-12));
  CHECK(res.tr_P == doctest::Approx(P.q().sum()));
}

TEST_CASE("rho moments are centered near zero when the true rho is zero") {
  McConfig c = small_config();
  c.rho = 0.0;
  const int reps = 200;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Setup s = setup(c, static_cast<std::uint64_t>(r));
    const double rho = preliminary_rho(*s.prob, c.truth()).rho;
    sum += rho;
    sum2 += rho * rho;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sum2 - reps * mean * mean) / (reps - 1));
  CHECK(std::abs(mean) < 3.0 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("rho objective minimum lies in the search interval and beats the grid") {
  for (std::uint64_t r = 0; r < 10; ++r) {
    const Setup s = setup(small_config(), r);
    const VectorXd d = preliminary_delta(*s.prob, s.q1);
    const RhoEstimate est = preliminary_rho(*s.prob, d);
    CHECK(est.rho >= -0.99);
    CHECK(est.rho <= 0.99);
    CHECK_FALSE(est.degenerate);

    // Brute-force objective on a fine grid from the dense definition.
    const MatrixXd W = s.prob->network().W.dense(), M = s.prob->network().M.dense();
    const MatrixXd J = s.prob->J().dense();
    const Index n = s.prob->n();
    const MatrixXd I = MatrixXd::Identity(n, n);
    const double trJ = J.trace();
    std::array<MatrixXd, 3> Mk;
    const std::array<MatrixXd, 3> A{W, M, MatrixXd(M * W)};
    for (int k = 0; k < 3; ++k) {
      const MatrixXd JAJ = J * A[static_cast<std::size_t>(k)] * J;
      Mk[static_cast<std::size_t>(k)] = JAJ - JAJ.trace() / trJ * I;
    }
    auto f = [&](double rho) {
      const VectorXd e = J * (I - rho * M) * (s.prob->y() - s.prob->Z() * d);
      double v = 0.0;
      for (const auto& Mm : Mk) v += std::pow(e.dot(Mm * e), 2);
      return v;
    };
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1980; ++i) best = std::min(best, f(-0.99 + 0.001 * i));
    CHECK(f(est.rho) <= best * (1.0 + 1e-9) + 1e-14);
    CHECK(est.objective == doctest::Approx(f(est.rho)).epsilon(1e-8));
  }
}

TEST_CASE("trace of P D matches a truncated Neumann series on a nilpotent network") {
  std::mt19937_64 g(77);
  // Links only to later members, no wrap-around: W is strictly upper triangular.
  std::vector<MatrixXd> blocks;
  for (int r = 0; r < 5; ++r) {
    MatrixXd A = MatrixXd::Zero(8, 8);
    for (Index i = 0; i < 8; ++i) {
      const Index k = std::uniform_int_distribution<Index>(0, 3)(g);
      for (Index d = 1; d <= k && i + d < 8; ++d) A(i, i + d) = 1.0;
    }
    blocks.push_back(A);
  }
  const GroupedNetwork net = GroupedNetwork::with_row_normalized_m(BlockDiagonal(blocks));
  PanelData data;
  data.y = oracle::random_matrix(g, 40, 1).col(0);
  data.x1 = oracle::random_matrix(g, 40, 1);
  data.x2 = oracle::random_matrix(g, 40, 1);
  const EstimationProblem prob(net, data);
  const MatrixXd W = net.W.dense(), J = prob.J().dense();
  CHECK((W * W * W * W * W * W * W * W).isZero(0.0));

  const MatrixXd Q = J * oracle::random_matrix(g, 40, 6);
  const auto spec = spectrum_of(Q);
  for (double lambda : {0.1, -0.3, 0.6}) {
    // ρ = 0: D = J W S⁻¹ = J W Σ_{j<8} λʲ Wʲ exactly.
    MatrixXd series = MatrixXd::Identity(40, 40), Wj = MatrixXd::Identity(40, 40);
    for (int j = 1; j < 8; ++j) {
      Wj = Wj * W;
      series += std::pow(lambda, j) * Wj;
    }
    const MatrixXd D = J * W * series;
    for (const Scheme& sc : {Scheme::full_projection(), Scheme::tikhonov(0.2)}) {
      const RegularizedProjector P(spec, sc);
      CHECK(std::abs(trace_pd(prob, P, lambda, 0.0) - (P.dense() * D).trace()) < 1e-8);
    }
    // Dense-inverse oracle with ρ ≠ 0.
    const double rho = 0.3;
    const MatrixXd M = net.M.dense(), I = MatrixXd::Identity(40, 40);
    const MatrixXd R = I - rho * M;
    const MatrixXd Dr = J * R * W * (I - lambda * W).inverse() * R.inverse();
    const RegularizedProjector P(spec, Scheme::tikhonov(0.05));
    CHECK(std::abs(trace_pd(prob, P, lambda, rho) - (P.dense() * Dr).trace()) < 1e-8);
  }
}

TEST_CASE("bias correction subtracts sigma2 tr(PD) H^-1 e1") {
  const Setup s = setup(small_config(), 5);
  const VectorXd d = preliminary_delta(*s.prob, s.q1);
  const double rho = preliminary_rho(*s.prob, d).rho;
  const RegularizedProjector P(spectrum_of(s.q2.Q), Scheme::full_projection());
  const EstimationResult bc = bias_corrected_2sls(*s.prob, P, d, rho);
  const EstimationResult raw = regularized_2sls(*s.prob, P, rho);

  const Index n = s.prob->n();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd W = s.prob->network().W.dense(), M = s.prob->network().M.dense();
  const MatrixXd J = s.prob->J().dense(), R = I - rho * M;
  const MatrixXd Pd = oracle::projector(s.q2.Q);
  const VectorXd eh = J * R * (s.prob->y() - s.prob->Z() * d);
  const double sigma2 = eh.squaredNorm() / static_cast<double>(n);
  const MatrixXd D = J * R * W * (I - d(0) * W).inverse() * R.inverse();
  const MatrixXd A = R * s.prob->Z();
  const VectorXd corr = sigma2 * (Pd * D).trace() *
                        (A.transpose() * Pd * A).ldlt().solve(VectorXd::Unit(3, 0));
  CHECK((bc.delta - (raw.delta - corr)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero-trace projector is rejected by the bias correction") {
  const Setup s = setup(small_config(), 1);
  auto empty = std::make_shared<Spectrum>();
  empty->psi = MatrixXd::Zero(s.prob->n(), 0);
  const RegularizedProjector P(empty, Scheme::tikhonov(1.0));
  CHECK(P.trace() == 0.0);
  CHECK_THROWS_AS(bias_corrected_2sls(*s.prob, P, VectorXd::Zero(3), 0.0), NumericalError);
}

TEST_CASE("scaling Y leaves lambda unchanged and scales beta") {
  for (std::uint64_t r = 0; r < 10; ++r) {
    const McConfig c = small_config();
    McDraw d = draw_replication(c, r);
    PanelData scaled = d.data;
    const double k = 3.7;
    scaled.y *= k;
    const EstimationProblem a(d.net, d.data), b(d.net, scaled);
    const InstrumentSet q1 = mc_q1(a.network(), a.J(), a.data().x1.col(0), a.data().x2.col(0));
    const VectorXd da = preliminary_delta(a, q1), db = preliminary_delta(b, q1);
    CHECK(db(0) == doctest::Approx(da(0)).epsilon(1e-9));
    CHECK(db(1) == doctest::Approx(k * da(1)).epsilon(1e-9));
    CHECK(db(2) == doctest::Approx(k * da(2)).epsilon(1e-9));
    const double ra = preliminary_rho(a, da).rho, rb = preliminary_rho(b, db).rho;
    CHECK(std::abs(ra - rb) < 1e-5);

    const InstrumentSet qn = normalize_columns(mc_q2(a.network(), a.J(), q1), Normalization::UnitVariance);
    const RegularizedProjector P(spectrum_of(qn.Q), Scheme::tikhonov(0.5));
    const VectorXd ea = regularized_2sls(a, P, ra).delta, eb = regularized_2sls(b, P, ra).delta;
    CHECK(eb(0) == doctest::Approx(ea(0)).epsilon(1e-9));
    CHECK(eb.tail(2).isApprox(k * ea.tail(2), 1e-9));
  }
}

TEST_CASE("singular normal equations carry the condition number") {
  const Setup s = setup(small_config(), 2);
  // A single instrument column cannot identify three coefficients.
  const RegularizedProjector P(spectrum_of(s.q1.Q.leftCols(1)), Scheme::full_projection());
  try {
    (void)regularized_2sls(*s.prob, P, 0.0);
    FAIL("expected a singular system");
  } catch (const NumericalError& e) {
    CHECK(e.condition_number() >= 1e14);
  }
  InstrumentSet one;
  one.Q = s.q1.Q.leftCols(1);
  one.labels = {"a"};
  CHECK_THROWS_AS(preliminary_delta(*s.prob, one), NumericalError);
}

TEST_CASE("mismatched data are rejected") {
  const GroupedNetwork net = generate_mc_network(2, 5, 2, std::uint64_t{1});
  PanelData d;
  d.y = VectorXd::Zero(9);
  d.x1 = MatrixXd::Zero(10, 1);
  CHECK_THROWS_AS(EstimationProblem(net, d), InputError);
  d.y = VectorXd::Zero(10);
  d.x1.resize(10, 0);
  CHECK_THROWS_AS(EstimationProblem(net, d), InputError);
}
