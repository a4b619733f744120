#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contractionkit/certificates.hpp"
#include "support.hpp"

#include <cmath>

using namespace contractionkit;
using testsupport::eig2x2_sym;
using testsupport::random_matrix;
using testsupport::random_pd;

namespace {

SweepSpec example1_lattice(int count = 50, double x_hi = 10.0) {
    return SweepSpec::lattice({count, count}, {Interval{0.0, x_hi}, Interval{0.0, 1.0}});
}

}  // namespace

TEST_CASE("lyapunov_residual equality and slack cases") {
    const Matrix neg_id = -Matrix::Identity(2, 2);
    CHECK(std::abs(lyapunov_residual(neg_id, SymMatrix::identity(2), -1.0)) <= 1e-12);
    CHECK(lyapunov_residual(neg_id, SymMatrix::identity(2), 0.0) == doctest::Approx(-2.0));
}

TEST_CASE("lyapunov residual is zero at the weighted measure") {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        const Matrix a = random_matrix(rng, n);
        const SymMatrix q = random_pd(rng, n);
        const Weight w = Weight::from_p(sqrt_pd(q));
        const double mu = mu2_weighted(a, w);
        CHECK(std::abs(lyapunov_residual(a, q, mu)) <= 1e-9 * std::max(1.0, std::abs(mu)));
    }
}

TEST_CASE("lemma round-trip in both directions") {
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        const Matrix a = random_matrix(rng, n);
        const SymMatrix q = random_pd(rng, n);
        CHECK(std::abs(lyapunov_residual(a, q, mu_from_lyapunov(a, q))) <= 1e-8);
    }
}

TEST_CASE("lyapunov residual decreases linearly in mu with slope -2") {
    Rng rng(63);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        const Matrix a = random_matrix(rng, n);
        const SymMatrix q = random_pd(rng, n);
        const double mu = rng.uniform(-2.0, 2.0);
        const double base = lyapunov_residual(a, q, mu);
        const double stepped = lyapunov_residual(a, q, mu + 0.1);
        CHECK(std::abs(stepped - (base - 0.2)) <= 1e-9);
        CHECK(stepped < base);
    }
}

TEST_CASE("mu_from_lyapunov reductions") {
    CHECK(mu_from_lyapunov(-Matrix::Identity(3, 3), SymMatrix::identity(3)) ==
          doctest::Approx(-1.0));
    Rng rng(64);
    const Matrix a = random_matrix(rng, 3);
    CHECK(std::abs(mu_from_lyapunov(a, SymMatrix::identity(3)) - mu2(a)) <= 1e-10);
}

TEST_CASE("remark_convert constants") {
    const RemarkConstants id_case = remark_convert(SymMatrix::identity(2), -2.0);
    CHECK(id_case.beta == doctest::Approx(-2.0));
    CHECK(id_case.gamma == doctest::Approx(-2.0));

    Vector d(2);
    d << 1.0, 4.0;
    const RemarkConstants spread = remark_convert(SymMatrix::from_diag(d), -1.0);
    CHECK(spread.beta == doctest::Approx(-1.0));
    CHECK(spread.gamma == doctest::Approx(-0.25));

    const RemarkConstants zero = remark_convert(SymMatrix::from_diag(d), 0.0);
    CHECK(zero.beta == doctest::Approx(0.0));
    CHECK(zero.gamma == doctest::Approx(0.0));

    Matrix indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(remark_convert(SymMatrix(indefinite), -1.0), std::invalid_argument);
}

TEST_CASE("remark_convert implications hold on shifted random instances") {
    Rng rng(65);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        const SymMatrix q = random_pd(rng, n);
        const double mu = rng.uniform(-2.0, 1.0);
        // Shift A so that QA + A^T Q <= mu*Q holds with a little slack.
        const Matrix a0 = random_matrix(rng, n);
        const double excess = lyapunov_residual(a0, q, 0.5 * mu);  // residual of 2*(mu/2)
        const Matrix a = a0 - (0.5 * excess + 1e-3) * Matrix::Identity(n, n);
        const Matrix m = q.data() * a + a.transpose() * q.data();

        const RemarkConstants constants = remark_convert(q, mu);
        // First implication: QA + A^T Q <= beta*I.
        const EigResult beta_check =
            sym_eig(SymMatrix(Matrix(m - constants.beta * Matrix::Identity(n, n))));
        CHECK(beta_check.eigenvalues(beta_check.eigenvalues.size() - 1) <= 1e-9);

        // Second implication: QA + A^T Q <= gamma*Q, via the congruence reduction.
        const Matrix p_inv = sqrt_pd(q).data().inverse();
        const Matrix reduced = p_inv * (m - constants.gamma * q.data()) * p_inv;
        const EigResult gamma_check = sym_eig(symmetric_part(reduced));
        CHECK(gamma_check.eigenvalues(gamma_check.eigenvalues.size() - 1) <= 1e-9);
    }
}

TEST_CASE("check_diffusion_compat") {
    Vector d(2);
    d << 0.3, 2.0;
    const Weight identity = Weight::from_p(SymMatrix::identity(2));
    const PdResult id_case = check_diffusion_compat(identity, DiffusionSpec(d));
    CHECK(id_case.positive_definite);
    CHECK(id_case.lambda_min == doctest::Approx(0.6));

    Vector q_diag(2);
    q_diag << 2.0, 0.5;
    const Weight diag_weight = Weight::from_q(SymMatrix::from_diag(q_diag));
    CHECK(check_diffusion_compat(diag_weight, DiffusionSpec(d)).positive_definite);

    // QD + DQ = [[2, 101], [101, 300]] is indefinite: det = 600 - 10201 < 0.
    Matrix q(2, 2);
    q << 1.0, 1.0, 1.0, 1.5;
    Vector spread(2);
    spread << 1.0, 100.0;
    const PdResult bad = check_diffusion_compat(Weight::from_q(SymMatrix(q)),
                                                DiffusionSpec(spread));
    CHECK_FALSE(bad.positive_definite);
    CHECK(bad.lambda_min < 0.0);
    CHECK(bad.lambda_min == doctest::Approx(eig2x2_sym(2.0, 101.0, 300.0).first));

    Vector wrong_dim(3);
    wrong_dim << 1.0, 1.0, 1.0;
    CHECK_THROWS_AS(check_diffusion_compat(identity, DiffusionSpec(wrong_dim)),
                    std::invalid_argument);
}

TEST_CASE("sup_mu_over_domain on a constant Jacobian") {
    Rng rng(66);
    const Matrix a = random_matrix(rng, 2);
    const ReactionSystem sys = linear_system(a, Vector::Zero(2));
    const Weight w = Weight::from_q(random_pd(rng, 2));
    SweepSpec spec = SweepSpec::lattice({5, 5}, {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}});
    const SupMuResult sup = sup_mu_over_domain(sys, w, spec);
    CHECK(sup.mu_sup == doctest::Approx(mu2_weighted(a, w)));
}

TEST_CASE("sup_mu_over_domain: claim weight is negative, diagonal weights fail") {
    const ReactionSystem sys = example1(1.0, 1.0, 1.0, 1.0, 1.0);
    Matrix q(2, 2);
    q << 1.0, 1.0, 1.0, 1.5;
    const Weight claim = Weight::from_q(SymMatrix(q));
    const SupMuResult negative = sup_mu_over_domain(sys, claim, example1_lattice());
    CHECK(negative.mu_sup < 0.0);
    CHECK(sys.domain.contains(negative.argmax_point));

    Vector diag(2);
    diag << 1.0, 2.0;
    const Weight diagonal = Weight::from_q(SymMatrix::from_diag(diag));
    const SupMuResult failing = sup_mu_over_domain(sys, diagonal, example1_lattice());
    CHECK(failing.mu_sup >= 0.0);
}

TEST_CASE("diagonal weights in the window dead band need a wider sweep") {
    // For Q = diag(1, 4) the indefinite region starts at b = 1 + x > 16, so the
    // [0,10] window shows no failure; widening to [0,30] exposes it.
    const ReactionSystem sys = example1(1.0, 1.0, 1.0, 1.0, 1.0);
    Vector diag(2);
    diag << 1.0, 4.0;
    const Weight w = Weight::from_q(SymMatrix::from_diag(diag));
    CHECK(sup_mu_over_domain(sys, w, example1_lattice(101, 10.0)).mu_sup < 0.0);
    CHECK(sup_mu_over_domain(sys, w, example1_lattice(201, 30.0)).mu_sup >= 0.0);
}

TEST_CASE("sup sweep determinism: random mode seeds and worker counts") {
    const ReactionSystem sys = example1(1.0, 1.0, 1.0, 1.0, 1.0);
    const Weight w = example1_weight(1.0, 1.0, 0.25);
    SweepSpec spec = example1_lattice(40);
    spec.mode = SweepSpec::Mode::random;
    spec.seed = 99;
    const SupMuResult serial = sup_mu_over_domain(sys, w, spec, 1);
    const SupMuResult repeat = sup_mu_over_domain(sys, w, spec, 1);
    const SupMuResult parallel = sup_mu_over_domain(sys, w, spec, 4);
    CHECK(serial.mu_sup == repeat.mu_sup);
    CHECK(serial.mu_sup == parallel.mu_sup);
    CHECK(max_abs(serial.argmax_point - parallel.argmax_point) == 0.0);
}

TEST_CASE("sweep spec validation") {
    const ReactionSystem sys = example1(1.0, 1.0, 1.0, 1.0, 1.0);
    SweepSpec bad_counts;
    bad_counts.counts = {1, 10};
    CHECK_THROWS_AS(resolve_sweep_axes(sys.domain, bad_counts), std::invalid_argument);

    SweepSpec outside = SweepSpec::lattice({5, 5}, {Interval{0.0, 5.0}, Interval{0.0, 2.0}});
    CHECK_THROWS_AS(resolve_sweep_axes(sys.domain, outside), std::invalid_argument);

    SweepSpec wrong_arity;
    wrong_arity.counts = {5};
    CHECK_THROWS_AS(resolve_sweep_axes(sys.domain, wrong_arity), std::invalid_argument);
}

TEST_CASE("certify_contraction bundles the sweep and the diffusion check") {
    const ReactionSystem sys = example1(1.0, 1.0, 1.0, 1.0, 1.0);
    const Weight w = example1_weight(1.0, 1.0, 0.25);
    Vector ones(2);
    ones << 1.0, 1.0;
    const ContractionCertificate pass =
        certify_contraction(sys, w, DiffusionSpec(ones), example1_lattice());
    CHECK(pass.pass);
    CHECK(pass.mu_sup < 0.0);
    CHECK(pass.diffusion_ok);

    Vector spread(2);
    spread << 1.0, 100.0;
    const ContractionCertificate bad_diffusion =
        certify_contraction(sys, w, DiffusionSpec(spread), example1_lattice());
    CHECK_FALSE(bad_diffusion.pass);
    CHECK_FALSE(bad_diffusion.diffusion_ok);
    CHECK(bad_diffusion.mu_sup < 0.0);

    const ReactionSystem expanding = linear_system(Matrix::Identity(2, 2), Vector::Zero(2));
    SweepSpec box = SweepSpec::lattice({3, 3}, {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}});
    const ContractionCertificate fail =
        certify_contraction(expanding, Weight::from_p(SymMatrix::identity(2)),
                            DiffusionSpec(ones), box);
    CHECK_FALSE(fail.pass);
    CHECK(fail.mu_sup == doctest::Approx(1.0));

    const nlohmann::json doc = certificate_to_json(pass);
    CHECK(doc["verdict"] == "pass");
    CHECK(doc["weight"]["Q"][0][1] == doctest::Approx(1.0));
    CHECK(doc.contains("caveat"));
}

TEST_CASE("certify passes for uniform diffusion at any scale") {
    const ReactionSystem sys = example1(1.0, 1.0, 1.0, 1.0, 1.0);
    const Weight w = example1_weight(1.0, 1.0, 0.25);
    for (double d : {0.1, 1.0, 10.0}) {
        const ContractionCertificate cert = certify_contraction(
            sys, w, DiffusionSpec(Vector::Constant(2, d)), example1_lattice());
        CHECK(cert.pass);
        // With D = d*I the coupling condition reduces to 2*d*Q > 0.
        CHECK(cert.diffusion_lambda_min ==
              doctest::Approx(2.0 * d * sym_eig(w.q()).eigenvalues(0)).epsilon(1e-9));
    }
}

TEST_CASE("example1_weight builds the claim matrix") {
    const Weight w = example1_weight(1.0, 1.0, 0.25);
    CHECK(w.q()(0, 0) == doctest::Approx(1.0));
    CHECK(w.q()(0, 1) == doctest::Approx(1.0));
    CHECK(w.q()(1, 1) == doctest::Approx(1.5));

    const Weight boundary = example1_weight(1.0, 1.0, 1e-9);
    CHECK(boundary.q()(1, 1) == doctest::Approx(1.25).epsilon(1e-8));

    // PD because det = q - 1 > 0 and trace > 0.
    CHECK(sym_eig(boundary.q()).eigenvalues(0) > 0.0);

    CHECK_THROWS_AS(example1_weight(1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(example1_weight(1.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("example1_det closed form") {
    CHECK(example1_det(1.5, 1.0, 0.0, 1.0) == doctest::Approx(1.0));
    CHECK(example1_det(1.25, 1.0, 0.0, 1.0) == doctest::Approx(0.0));

    Rng rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        const double q = rng.uniform(1.01, 3.0);
        const double delta = rng.uniform(0.1, 2.0);
        const double b = rng.uniform(0.1, 5.0);
        CHECK(example1_det(q, delta, delta / (q - 1.0), b) ==
              doctest::Approx(4.0 * delta * b * (q - 1.0)));
    }
}

TEST_CASE("example1_det equals the determinant of the assembled matrix") {
    Rng rng(68);
    for (int trial = 0; trial < 1000; ++trial) {
        const double q = rng.uniform(0.5, 4.0);
        const double delta = rng.uniform(0.01, 3.0);
        const double a = rng.uniform(0.0, 5.0);
        const double b = rng.uniform(0.0, 5.0);
        Matrix weight(2, 2);
        weight << 1.0, 1.0, 1.0, q;
        Matrix j(2, 2);
        j << -delta - a, b, a, -b;
        const Matrix m = weight * j + j.transpose() * weight;
        CHECK(std::abs(example1_det(q, delta, a, b) - m.determinant()) <= 1e-10);
    }
}

TEST_CASE("example1_det is positive at the proof's extremal candidates above threshold") {
    // The step f(a) <= delta^2 on [0, k2*S_Y] needs (q-1)*k2*S_Y <= 2*delta (the
    // parabola must not rise past its a = 0 value inside the interval), so q is drawn
    // between the claim threshold and that ceiling; parameters without room between
    // the two are redrawn.
    Rng rng(69);
    int checked = 0;
    while (checked < 200) {
        const double delta = rng.uniform(0.1, 2.0);
        const double k1 = rng.uniform(0.1, 2.0);
        const double k2 = rng.uniform(0.1, 2.0);
        const double s_y = rng.uniform(0.1, 2.0);
        const double q_lo = 1.0 + delta / (4.0 * k1);
        const double q_hi = 1.0 + 2.0 * delta / (k2 * s_y);
        if (q_hi <= q_lo * 1.001) {
            continue;
        }
        const double q = q_lo + rng.uniform(0.001, 1.0) * (q_hi - q_lo);
        ++checked;
        std::vector<double> candidates = {0.0, k2 * s_y};
        const double vertex = delta / (q - 1.0);
        if (vertex <= k2 * s_y) {
            candidates.push_back(vertex);
        }
        for (double a : candidates) {
            CHECK(example1_det(q, delta, a, k1) > 0.0);
        }
    }
}

TEST_CASE("check_lemma_conditions on the concrete feedback system") {
    const ReactionSystem sys = example2(0.5, 0.1, 1.0);
    SweepSpec spec = SweepSpec::lattice({200, 200}, {Interval{0.0, 50.0}, Interval{0.0, 50.0}});
    const LemmaConditionReport report = check_lemma_conditions(sys, 1.0, 0.25, spec);
    CHECK(report.condition1);
    CHECK(report.condition2);
    CHECK(report.condition3);
    CHECK(report.all());
    // Condition 1 margin is -1 + delta everywhere; condition 2 peaks at y = 0 with -d.
    CHECK(report.worst1.margin == doctest::Approx(-0.5));
    CHECK(report.worst2.margin == doctest::Approx(-1.0));
    CHECK(report.worst2.point(0) == doctest::Approx(0.0));
}

TEST_CASE("check_lemma_conditions flags a too-weak decay rate") {
    const ReactionSystem sys = example2(0.99, 0.1, 1.0);
    SweepSpec spec = SweepSpec::lattice({100, 100}, {Interval{0.0, 20.0}, Interval{0.0, 20.0}});
    const LemmaConditionReport report = check_lemma_conditions(sys, 1.0, 0.5, spec);
    CHECK_FALSE(report.condition1);
    CHECK(report.worst1.margin == doctest::Approx(-0.01));
    CHECK_FALSE(report.all());

    const ReactionSystem missing = linear_system(-Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK_THROWS_AS(check_lemma_conditions(missing, 1.0, 0.5, spec), std::invalid_argument);
}

TEST_CASE("find_indefinite_point locates the quartic-vs-quadratic crossover") {
    const ReactionSystem sys = example2(0.5, 0.1, 1.0);
    SweepSpec scan;
    scan.counts = {2, 200};
    const auto hit = find_indefinite_point(sys, SymMatrix::identity(2), scan);
    REQUIRE(hit.has_value());
    CHECK(hit->mu_value >= 0.0);
    CHECK(hit->point(1) <= 1e4);
    // Cross-check with the displayed determinant: at the hit, J + J^T is not
    // negative definite.
    const Matrix j = sys.jacobian(hit->point, 0.0);
    const Matrix m = j + j.transpose();
    CHECK((m.determinant() < 0.0 || m.trace() >= 0.0));
}

TEST_CASE("find_indefinite_point returns nothing for a uniformly contracting system") {
    const ReactionSystem sys = linear_system(-Matrix::Identity(2, 2), Vector::Zero(2));
    SweepSpec scan;
    scan.counts = {2, 100};
    CHECK_FALSE(find_indefinite_point(sys, SymMatrix::identity(2), scan).has_value());
}

TEST_CASE("find_indefinite_point succeeds for random positive definite weights") {
    const ReactionSystem sys = example2(0.5, 0.1, 1.0);
    SweepSpec scan;
    scan.counts = {2, 400};
    Rng rng(70);
    for (int trial = 0; trial < 20; ++trial) {
        const SymMatrix p = random_pd(rng, 2);
        const auto hit = find_indefinite_point(sys, p, scan);
        REQUIRE(hit.has_value());
        CHECK(hit->point(1) <= 1e4);
    }
    // Diagonal weights of the lemma's Q = diag(1, lambda) family: the crossover for
    // P = diag(1, lambda) sits near y = (2.72 * lambda)^5 at eps = 0.1, so small
    // lambda is visible in the default window while large lambda needs a wider scan.
    for (int trial = 0; trial < 5; ++trial) {
        Vector d(2);
        d << 1.0, rng.uniform(0.2, 2.0);
        CHECK(find_indefinite_point(sys, SymMatrix::from_diag(d), scan).has_value());
    }
    Vector wide(2);
    wide << 1.0, 5.0;
    CHECK_FALSE(find_indefinite_point(sys, SymMatrix::from_diag(wide), scan).has_value());
    SweepSpec deep = scan;
    deep.counts = {2, 800};
    deep.windows = {std::nullopt, Interval{0.0, 1e7}};
    CHECK(find_indefinite_point(sys, SymMatrix::from_diag(wide), deep).has_value());
}
