#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ptycho/adp.hpp"
#include "ptycho/app.hpp"
#include "ptycho/fft.hpp"
#include "ptycho/metrics.hpp"
#include "test_util.hpp"

#include <functional>

using namespace ptycho;

namespace {

Dataset small_dataset(double background_peak = 0.0, std::uint64_t seed = 3)
{
    RunConfig cfg;
    cfg.seed = seed;
    cfg.geometry.object = {32, 32};
    cfg.geometry.frame_side = 16;
    cfg.geometry.step = 4;
    cfg.probe.side = 16;
    cfg.probe.fwhm = 6;
    cfg.probe.photons_per_frame = 1e4;
    cfg.noise.background_peak = background_peak;
    return build_dataset(cfg);
}

FrameStack shifted_stack(std::vector<RealField2D> frames)
{
    FrameStack st;
    st.frames = std::move(frames);
    return shift_poisson(st, 0.0);
}

// Randomizes every block of the iterate so the update formulas are exercised away from init.
void scramble(SolverState& s, std::mt19937_64& rng)
{
    s.omega = testutil::random_complex(s.omega.shape(), rng);
    s.u = testutil::random_complex(s.u.shape(), rng);
    for (std::size_t j = 0; j < s.z.size(); ++j) {
        s.z[j] = testutil::random_complex(s.z[j].shape(), rng);
        s.lambda1[j] = testutil::random_complex(s.z[j].shape(), rng);
        s.mu[j] = testutil::random_real(s.z[j].shape(), rng);
        s.lambda2[j] = testutil::random_real(s.z[j].shape(), rng);
    }
    s.phi_tilde = testutil::random_real(s.phi_tilde.shape(), rng);
}

double golden(const std::function<double(double)>& f, double hi)
{
    constexpr int grid = 4000;
    int best = 0;
    for (int i = 1; i <= grid; ++i)
        if (f(hi * i / grid) < f(hi * best / grid)) best = i;
    double a = hi * std::max(0, best - 1) / grid, b = hi * std::min(grid, best + 1) / grid;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) < f(d))
            b = d;
        else
            a = c;
    }
    return 0.5 * (a + b);
}

double h_objective(double C, double r, double I, double x, double eps, double rho)
{
    const double v = rho * rho + eps * eps;
    return 0.5 * C * (v - (I + eps * eps) * std::log(v)) + 0.5 * r * (rho - x) * (rho - x);
}

}  // namespace

TEST_CASE("closed-form rho")
{
    CHECK(rho_closed_form(1.0, 1.0, 4.0, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(rho_closed_form(1.0, 2.0, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    const double ref = golden([](double p) { return h_objective(1.0, 2.0, 1.0, 0.0, 0.0, p); }, 3.0);
    CHECK(rho_closed_form(1.0, 2.0, 1.0, 0.0) == doctest::Approx(ref).epsilon(1e-7));
    // Fixed point rho = sqrt(I) when |X| = sqrt(I), for any weights.
    for (double C : {0.3, 1.0, 7.0})
        for (double r : {0.1, 1.0, 5.0}) CHECK(rho_closed_form(C, r, 9.0, 3.0) == doctest::Approx(3.0));
    // With no data the weight pulls toward 0: rho = r x / (C + r).
    CHECK(rho_closed_form(3.0, 1.0, 0.0, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("projected gradient rho matches a dense-grid minimizer")
{
    const double C = 1.0, r = 1.0, I = 1.0, x = 1.0, eps = 0.5;
    const double ref = golden([&](double p) { return h_objective(C, r, I, x, eps, p); }, 5.0);
    const double tau = rho_default_step(C, r, I, eps);
    const double rho = rho_projected_gradient(C, r, I, x, eps, tau, 5000, rho_closed_form(C, r, I, x));
    CHECK(std::abs(rho - ref) <= 1e-8);
    CHECK(rho_default_step(1.0, 1.0, 1.0, 0.5) == doctest::Approx(0.9 / (2.0 + 1.25 / 0.25)));
    // Iterates stay in the feasible set.
    CHECK(rho_projected_gradient(1.0, 1.0, 0.0, 0.0, 0.5, 0.1, 50, 1.0) >= 0.0);
}

TEST_CASE("resolve fills data-dependent defaults")
{
    const auto st = shifted_stack({RealField2D(2, 2, 4.0), RealField2D(2, 2, 16.0)});
    const auto rc = resolve(SolverConfig{}, st);
    CHECK(rc.alpha1 == doctest::Approx(1e-8 * 10.0));
    CHECK(rc.alpha2 == doctest::Approx(1e-8 * 10.0));
    CHECK(rc.lambda == doctest::Approx(1e-3 * 3.0));
    CHECK(rc.beta == doctest::Approx(10.0 * rc.lambda));
    CHECK(rc.residual_floor == doctest::Approx(1e-8 * std::sqrt(10.0)));
    SolverConfig cfg;
    cfg.alpha1 = 0.5;
    CHECK(resolve(cfg, st).alpha1 == 0.5);
}

TEST_CASE("solver config validation")
{
    auto bad = [](auto mutate) {
        SolverConfig c;
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.r = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.gamma = 2.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.alpha1 = -1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.tau = 0.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.warm_start_iter = 1000; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.epsilon = -0.1; }).validate(), std::invalid_argument);
    CHECK_NOTHROW(SolverConfig{}.validate());
}

TEST_CASE("init_state")
{
    SUBCASE("one frame of constant intensity gives a single-pixel probe")
    {
        const ScanGeometry g({{0, 0}}, 4, {4, 4});
        const auto st = shifted_stack({RealField2D(4, 4, 1.0)});
        const auto s = init_state(st, g, SolverConfig{});
        std::size_t nonzero = 0;
        for (const auto& v : s.omega) nonzero += std::abs(v) > 1e-12;
        CHECK(nonzero == 1);
        CHECK(std::abs(s.omega(2, 2) - cplx{4.0, 0.0}) < 1e-12);
    }
    SUBCASE("zero blocks, unit object and consistent z")
    {
        const auto d = small_dataset();
        const auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        for (const auto& v : s.u) CHECK(v == cplx{1.0, 0.0});
        for (const auto& m : s.mu) CHECK(norm(m) == 0.0);
        CHECK(lambda2_sum_max(s) == 0.0);
        const auto z = forward(s.omega, s.u, d.geometry);
        for (std::size_t j = 0; j < z.size(); ++j) CHECK(testutil::max_abs_diff(z[j], s.z[j]) == 0.0);
        for (const auto& w : s.weights) CHECK(w == RealField2D(d.geometry.frame_shape(), 1.0));
    }
    SUBCASE("detector mask seeds the weights")
    {
        const auto d = small_dataset();
        SolverConfig cfg;
        cfg.detector_mask = RealField2D(d.geometry.frame_shape(), 1.0);
        cfg.detector_mask[0] = 0.0;
        const auto s = init_state(d.shifted, d.geometry, cfg);
        CHECK(s.weights[3] == cfg.detector_mask);
        cfg.detector_mask = RealField2D(3, 3, 1.0);
        CHECK_THROWS_AS(init_state(d.shifted, d.geometry, cfg), ShapeError);
    }
    SUBCASE("unshifted stack is rejected")
    {
        const auto d = small_dataset();
        CHECK_THROWS_AS(init_state(d.raw, d.geometry, SolverConfig{}), std::invalid_argument);
    }
}

TEST_CASE("probe update")
{
    std::mt19937_64 rng(31);
    SUBCASE("single frame with unit object and no proximal term is idft2(z + Lambda1)")
    {
        const ScanGeometry g({{0, 0}}, 4, {4, 4});
        const auto st = shifted_stack({RealField2D(4, 4, 1.0)});
        auto s = init_state(st, g, SolverConfig{});
        s.z[0] = testutil::random_complex({4, 4}, rng);
        s.lambda1[0] = testutil::random_complex({4, 4}, rng);
        SolverConfig cfg;
        cfg.alpha1 = 0.0;
        const auto w = probe_update(s, g, resolve(cfg, st));
        CHECK(testutil::max_abs_diff(w, idft2(s.z[0] + s.lambda1[0])) < 1e-12);
    }
    SUBCASE("large proximal weight keeps the previous probe")
    {
        const auto d = small_dataset();
        auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        scramble(s, rng);
        SolverConfig cfg;
        cfg.alpha1 = 1e12;
        const auto w = probe_update(s, d.geometry, resolve(cfg, d.shifted));
        CHECK(norm(w - s.omega) <= 1e-8 * norm(s.omega));
    }
    SUBCASE("result zeroes the gradient of the per-pixel quadratic")
    {
        const auto d = small_dataset();
        auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        scramble(s, rng);
        SolverConfig cfg;
        cfg.alpha1 = 0.7;
        const auto w = probe_update(s, d.geometry, resolve(cfg, d.shifted));
        const auto back = backpropagate(s);
        ComplexField2D gradient = 0.7 * (w - s.omega);
        double scale = 0.0;
        for (std::size_t j = 0; j < d.geometry.num_frames(); ++j) {
            const auto patch = extract(s.u, d.geometry, j);
            for (std::size_t i = 0; i < patch.size(); ++i) {
                gradient[i] += std::conj(patch[i]) * (w[i] * patch[i] - back[j][i]);
                scale += std::abs(std::conj(patch[i]) * back[j][i]);
            }
        }
        CHECK(norm(gradient) <= 1e-12 * scale);
    }
    SUBCASE("lens mask band-limits the probe")
    {
        const auto d = small_dataset();
        auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        scramble(s, rng);
        SolverConfig cfg;
        cfg.lens_mask = RealField2D(d.geometry.frame_shape());
        cfg.lens_mask(0, 0) = cfg.lens_mask(0, 1) = cfg.lens_mask(1, 0) = 1.0;
        const auto spectrum = dft2(probe_update(s, d.geometry, resolve(cfg, d.shifted)));
        for (std::size_t i = 0; i < spectrum.size(); ++i)
            if (cfg.lens_mask[i] == 0.0) CHECK(std::abs(spectrum[i]) < 1e-12);
    }
    SUBCASE("singular denominator names the pixel")
    {
        const auto d = small_dataset();
        auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        s.u = ComplexField2D(d.geometry.object_shape());
        SolverConfig cfg;
        cfg.alpha1 = 0.0;
        try {
            probe_update(s, d.geometry, resolve(cfg, d.shifted));
            FAIL("expected SolverError");
        } catch (const SolverError& e) {
            CHECK(std::string(e.what()).find("pixel (0, 0)") != std::string::npos);
        }
    }
}

TEST_CASE("object update")
{
    std::mt19937_64 rng(32);
    SUBCASE("one window over the whole object with a unit probe is idft2(z + Lambda1)")
    {
        const ScanGeometry g({{0, 0}}, 4, {4, 4});
        const auto st = shifted_stack({RealField2D(4, 4, 1.0)});
        auto s = init_state(st, g, SolverConfig{});
        s.omega = ComplexField2D(4, 4, 1.0);
        s.z[0] = testutil::random_complex({4, 4}, rng);
        s.lambda1[0] = testutil::random_complex({4, 4}, rng);
        SolverConfig cfg;
        cfg.alpha2 = 0.0;
        const auto u = object_update(s, g, resolve(cfg, st));
        CHECK(testutil::max_abs_diff(u, idft2(s.z[0] + s.lambda1[0])) < 1e-12);
    }
    SUBCASE("large proximal weight keeps the previous object")
    {
        const auto d = small_dataset();
        auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        scramble(s, rng);
        SolverConfig cfg;
        cfg.alpha2 = 1e12;
        CHECK(norm(object_update(s, d.geometry, resolve(cfg, d.shifted)) - s.u) <= 1e-8 * norm(s.u));
    }
    SUBCASE("result zeroes the gradient of the per-pixel quadratic")
    {
        const auto d = small_dataset();
        auto s = init_state(d.shifted, d.geometry, SolverConfig{});
        scramble(s, rng);
        SolverConfig cfg;
        cfg.alpha2 = 0.3;
        const auto u = object_update(s, d.geometry, resolve(cfg, d.shifted));
        const auto back = backpropagate(s);
        ComplexField2D gradient = 0.3 * (u - s.u);
        double scale = 0.0;
        for (std::size_t j = 0; j < d.geometry.num_frames(); ++j) {
            const auto patch = extract(u, d.geometry, j);
            ComplexField2D term(d.geometry.frame_shape());
            for (std::size_t i = 0; i < patch.size(); ++i) {
                term[i] = std::conj(s.omega[i]) * (s.omega[i] * patch[i] - back[j][i]);
                scale += std::abs(std::conj(s.omega[i]) * back[j][i]);
            }
            embed_accumulate(term, d.geometry, j, gradient);
        }
        CHECK(norm(gradient) <= 1e-12 * scale);
    }
    SUBCASE("uncovered pixel with alpha2 = 0 is singular")
    {
        const ScanGeometry g({{0, 0}}, 2, {3, 3});
        const auto st = shifted_stack({RealField2D(2, 2, 1.0)});
        auto s = init_state(st, g, SolverConfig{});
        SolverConfig cfg;
        cfg.alpha2 = 0.0;
        CHECK_THROWS_AS(object_update(s, g, resolve(cfg, st)), SolverError);
    }
}

TEST_CASE("joint (z, mu) update")
{
    std::mt19937_64 rng(33);
    const auto d = small_dataset(0.5);
    auto s = init_state(d.shifted, d.geometry, SolverConfig{});
    scramble(s, rng);
    const auto model = forward(s.omega, s.u, d.geometry);

    SUBCASE("eps = 0: stationarity, direction and the magnitude floor")
    {
        SolverConfig cfg;
        cfg.r = 0.7;
        const auto rc = resolve(cfg, d.shifted);
        auto t = s;
        zmu_update(t, d.shifted, rc, model);
        for (std::size_t j = 0; j < t.z.size(); ++j)
            for (std::size_t p = 0; p < t.z[j].size(); ++p) {
                const cplx a = model[j][p] - s.lambda1[j][p];
                const double b = s.phi_tilde[p] - s.lambda2[j][p];
                const double x = std::sqrt(std::norm(a) + b * b);
                const double I = d.shifted.frames[j][p];
                const double rho = std::sqrt(std::norm(t.z[j][p]) + t.mu[j][p] * t.mu[j][p]);
                const double C = 1.0, r = 0.7;
                CHECK(std::abs((C + r) * rho - C * I / rho - r * x) <= 1e-8 * (C + r) * rho);
                CHECK(std::abs(t.z[j][p] - a * (rho / x)) <= 1e-12 * rho);
                CHECK(std::abs(t.mu[j][p] - b * (rho / x)) <= 1e-12 * rho);
                CHECK(rho >= std::sqrt(I) / (1.0 + r) - 1e-12);
            }
    }
    SUBCASE("eps > 0 runs the projected gradient from the previous rho")
    {
        SolverConfig cfg;
        cfg.epsilon = 0.5;
        cfg.inner_iters = 3;
        const auto rc = resolve(cfg, d.shifted);
        auto t = s;
        zmu_update(t, d.shifted, rc, model);
        const std::size_t j = 2, p = 17;
        const cplx a = model[j][p] - s.lambda1[j][p];
        const double b = s.phi_tilde[p] - s.lambda2[j][p];
        const double x = std::sqrt(std::norm(a) + b * b);
        const double I = d.shifted.frames[j][p];
        const double first = rho_projected_gradient(1.0, 1.0, I, x, 0.5, rho_default_step(1.0, 1.0, I, 0.5), 3,
                                                    rho_closed_form(1.0, 1.0, I, x));
        CHECK(t.rho[j][p] == doctest::Approx(first).epsilon(1e-14));
        const auto kept = t.rho[j][p];
        zmu_update(t, d.shifted, rc, model);
        const double second =
            rho_projected_gradient(1.0, 1.0, I, x, 0.5, rho_default_step(1.0, 1.0, I, 0.5), 3, kept);
        CHECK(t.rho[j][p] == doctest::Approx(second).epsilon(1e-14));
    }
    SUBCASE("zero |X| puts everything in z with unit phase")
    {
        auto t = s;
        t.lambda1[0][5] = model[0][5];
        t.lambda2[0][5] = t.phi_tilde[5];
        zmu_update(t, d.shifted, resolve(SolverConfig{}, d.shifted), model);
        CHECK(t.z[0][5].imag() == 0.0);
        CHECK(t.z[0][5].real() == doctest::Approx(std::sqrt(d.shifted.frames[0][5] / 2.0)));
        CHECK(t.mu[0][5] == 0.0);
    }
    SUBCASE("negative intensity is rejected")
    {
        auto st = d.shifted;
        st.frames[1][3] = -1.0;
        CHECK_THROWS_AS(zmu_update(s, st, resolve(SolverConfig{}, d.shifted), model), SolverError);
    }
}

TEST_CASE("multiplier update")
{
    std::mt19937_64 rng(34);
    const auto d = small_dataset();
    auto s = init_state(d.shifted, d.geometry, SolverConfig{});
    scramble(s, rng);
    SUBCASE("z equal to the model and equal mu leave the multipliers alone")
    {
        auto t = s;
        const auto common = testutil::random_real(d.geometry.frame_shape(), rng);
        for (auto& m : t.mu) m = common;
        const auto model = t.z;
        multiplier_update(t, model);
        for (std::size_t j = 0; j < t.z.size(); ++j) {
            CHECK(t.lambda1[j] == s.lambda1[j]);
            CHECK(testutil::max_abs_diff(t.lambda2[j], s.lambda2[j]) < 1e-15);
        }
        CHECK(testutil::max_abs_diff(t.phi_tilde, common) < 1e-15);
    }
    SUBCASE("Lambda2 sums to zero after an arbitrary update")
    {
        auto t = s;
        for (auto& l : t.lambda2) l = RealField2D(l.shape());
        const auto model = forward(t.omega, t.u, d.geometry);
        for (int k = 0; k < 5; ++k) {
            for (auto& m : t.mu) m = testutil::random_real(m.shape(), rng);
            multiplier_update(t, model);
            CHECK(lambda2_sum_max(t) <= 1e-13);
        }
    }
}

TEST_CASE("background warm start")
{
    const auto d = small_dataset(1.0);
    auto s = init_state(d.shifted, d.geometry, SolverConfig{});
    SUBCASE("exact iterate recovers sqrt(phi*)")
    {
        s.omega = d.probe_true;
        s.u = d.object_true;
        background_warm_start(s, d.shifted, forward(s.omega, s.u, d.geometry));
        RealField2D expect = d.background_true;
        for (double& v : expect) v = std::sqrt(v);
        for (const auto& m : s.mu) CHECK(testutil::max_abs_diff(m, expect) < 1e-6);
        CHECK(testutil::max_abs_diff(s.phi_tilde, expect) < 1e-6);
    }
    SUBCASE("model brighter than the data gives zero")
    {
        double peak = 0.0;
        for (const auto& f : d.shifted.frames)
            for (double v : f) peak = std::max(peak, v);
        std::vector<ComplexField2D> model(d.shifted.num_frames(),
                                          ComplexField2D(d.geometry.frame_shape(), std::sqrt(peak) + 1.0));
        background_warm_start(s, d.shifted, model);
        for (const auto& m : s.mu) CHECK(norm(m) == 0.0);
    }
    SUBCASE("matches direct evaluation")
    {
        std::mt19937_64 rng(35);
        const auto model = forward(testutil::random_complex(d.geometry.frame_shape(), rng), d.object_true, d.geometry);
        background_warm_start(s, d.shifted, model);
        const std::size_t J = model.size();
        for (std::size_t t : {0ul, 40ul, 255ul}) {
            double acc = 0.0;
            for (std::size_t j = 0; j < J; ++j) acc += d.shifted.frames[j][t] - std::norm(model[j][t]);
            CHECK(s.mu[J - 1][t] == doctest::Approx(std::sqrt(std::max(0.0, acc / J))));
        }
    }
}

TEST_CASE("outlier weights")
{
    const auto st = shifted_stack({RealField2D(Shape{1, 4}, {1.0, 1.0, 1.0, 1.0})});
    SolverState s;
    s.z = {ComplexField2D(Shape{1, 4}, {3.0, 5.0, 2.0, 1.0})};  // residuals 2, 4, 1, 0
    s.mu = {RealField2D(1, 4)};
    s.weights = {RealField2D(1, 4, 1.0)};
    SolverConfig cfg;
    cfg.gamma = 1.0;
    auto rc = resolve(cfg, st);
    weight_update(s, st, rc);
    CHECK(s.weights[0][0] == doctest::Approx(1.0));
    CHECK(s.weights[0][1] == doctest::Approx(0.5));
    CHECK(s.weights[0][2] == doctest::Approx(2.0));
    CHECK(s.weights[0][3] == cfg.weight_cap);  // residual below the floor

    rc.cfg.gamma = 2.0;
    weight_update(s, st, rc);
    for (double w : s.weights[0]) CHECK(w == 1.0);

    rc.cfg.gamma = 1.0;
    rc.cfg.detector_mask = RealField2D(Shape{1, 4}, {1.0, 0.0, 1.0, 1.0});
    weight_update(s, st, rc);
    CHECK(s.weights[0][1] == 0.0);
    CHECK(s.weights[0][0] == doctest::Approx(1.0));

    rc.cfg.gamma = 2.5;
    CHECK_THROWS_AS(weight_update(s, st, rc), std::invalid_argument);
}

TEST_CASE("run_adp")
{
    const auto d = small_dataset();
    SolverConfig cfg;
    cfg.max_iters = 40;
    cfg.background_enabled = false;
    const auto rec = run_adp(d.shifted, d.geometry, cfg);
    CHECK(rec.iterations == 40);
    REQUIRE(rec.history.size() == 40);
    for (std::size_t k = 0; k < rec.history.size(); ++k) {
        CHECK(rec.history[k].iter == static_cast<int>(k));
        CHECK(std::isfinite(rec.history[k].r_factor));
        CHECK(rec.history[k].r_factor >= 0.0);
        CHECK(std::isfinite(rec.history[k].lagrangian));
    }
    CHECK(rec.history.back().r_factor < rec.history.front().r_factor);
    for (double v : rec.phi) CHECK(v == 0.0);

    SUBCASE("phi is the square of the mean mu")
    {
        const auto db = small_dataset(0.5);
        SolverConfig c2;
        c2.max_iters = 12;
        SolverState last;
        const auto r2 = run_adp(db.shifted, db.geometry, c2, [&](const MetricsRecord&, const SolverState& s) { last = s; });
        for (std::size_t t = 0; t < r2.phi.size(); ++t) CHECK(r2.phi[t] == last.phi_tilde[t] * last.phi_tilde[t]);
        CHECK(norm(r2.phi) > 0.0);
    }
    SUBCASE("tolerance stops after ten small changes")
    {
        SolverConfig c3 = cfg;
        c3.max_iters = 500;
        c3.tol = 1e9;
        CHECK(run_adp(d.shifted, d.geometry, c3).iterations == 10);
    }
    SUBCASE("unshifted data is rejected")
    {
        CHECK_THROWS_AS(run_adp(d.raw, d.geometry, cfg), std::invalid_argument);
    }
}

TEST_CASE("gauge covariance: (c w, u / c) starts give the same R-factor sequence")
{
    const auto d = small_dataset(0.3);
    SolverConfig cfg;
    cfg.max_iters = 25;
    cfg.alpha1 = 0.0;
    cfg.alpha2 = 0.0;
    cfg.warm_start_iter = 5;
    const auto s0 = init_state(d.shifted, d.geometry, cfg);
    auto s1 = s0;
    const cplx c = std::polar(2.0, 0.7);
    s1.omega *= c;
    s1.u *= 1.0 / c;
    const auto a = run_adp(d.shifted, d.geometry, cfg, s0);
    const auto b = run_adp(d.shifted, d.geometry, cfg, s1);
    for (std::size_t k = 0; k < a.history.size(); ++k)
        CHECK(std::abs(a.history[k].r_factor - b.history[k].r_factor) <= 1e-9);
}

TEST_CASE("local Lipschitz estimate of the data term")
{
    const auto st = shifted_stack({RealField2D(1, 1, 4.0)});
    SolverState s;
    s.z = {ComplexField2D(1, 1, cplx{1.0, 0.0})};
    s.mu = {RealField2D(1, 1)};
    s.weights = {RealField2D(1, 1, 1.0)};
    // eps = 0, s = 1: radial 1 + 4 = 5, tangential 1 - 4 = -3.
    CHECK(local_lipschitz(s, st, 0.0) == doctest::Approx(5.0));
}
