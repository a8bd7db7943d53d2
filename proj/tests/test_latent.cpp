#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "wvae/errors.hpp"
#include "wvae/latent.hpp"
#include "wvae/random.hpp"

using namespace wvae;

namespace {

using Mask = std::vector<std::uint8_t>;

Image row(std::initializer_list<double> v) {
    Image img(1, v.size(), 1);
    std::copy(v.begin(), v.end(), img.values.begin());
    return img;
}

}  // namespace

TEST_CASE("gaussian reparameterisation") {
    const GaussianPosterior tight{{1, 2}, {-50, -50}};
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        const auto s = reparameterize_gaussian(tight, seed);
        CHECK(s.z[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.z[1] == doctest::Approx(2.0).epsilon(1e-9));
    }

    const std::vector<double> eps{1.5};
    CHECK(reparameterize_gaussian(GaussianPosterior{{0}, {0}}, eps).z[0] == 1.5);

    const GaussianPosterior post{{0.3, -1.0}, {0.4, -0.7}};
    const auto a = reparameterize_gaussian(post, 7);
    const auto b = reparameterize_gaussian(post, 7);
    CHECK(a.z == b.z);
    CHECK(a.noise == b.noise);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.z[i] == doctest::Approx(post.mu[i] + std::exp(0.5 * post.logvar[i]) * a.noise[i]).epsilon(1e-15));
    }
    CHECK(reparameterize_gaussian(post, 8).noise != a.noise);

    CHECK_THROWS_AS(reparameterize_gaussian(GaussianPosterior{{0, 1}, {0}}, 1), ShapeError);
    CHECK_THROWS_AS(reparameterize_gaussian(post, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("gaussian reparameterisation sample moments") {
    // Mean and variance of z over many seeds match mu and exp(logvar).
    const GaussianPosterior post{{0.5}, {std::log(0.25)}};
    const std::size_t n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = reparameterize_gaussian(post, derive_seed(123, i)).z[0];
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(0.25 / n) + 1e-12);
    CHECK(std::abs(var - 0.25) < 0.02);
}

TEST_CASE("wavelet reparameterisation") {
    const std::vector<double> c{1, 2, -3, 0.5};
    const Mask mask{0, 1, 1, 1};
    NoiseScale tiny{-50, -50, true};
    const auto quiet = reparameterize_wavelet(c, mask, tiny, 5);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(quiet.c_tilde[i] == doctest::Approx(c[i]).epsilon(1e-15));

    const std::vector<double> two{1, 2};
    const std::vector<double> eps{1, -1};
    const auto half = NoiseScale::from_scale(0.5, true);
    const auto s = reparameterize_wavelet(two, Mask{0, 1}, half, eps);
    CHECK(s.c_tilde[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(s.c_tilde[1] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(s.c_nn == two);
    CHECK(s.noise == eps);

    // Separate scales per band family.
    NoiseScale split{std::log(2.0), std::log(3.0), true};
    const auto t = reparameterize_wavelet(two, Mask{0, 1}, split, std::vector<double>{1, 1});
    CHECK(t.c_tilde[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(t.c_tilde[1] == doctest::Approx(5.0).epsilon(1e-15));

    const auto d1 = reparameterize_wavelet(c, mask, NoiseScale{}, 42);
    const auto d2 = reparameterize_wavelet(c, mask, NoiseScale{}, 42);
    CHECK(d1.c_tilde == d2.c_tilde);

    CHECK_THROWS_AS(reparameterize_wavelet(c, Mask{0, 1}, NoiseScale{}, 1), ShapeError);
    CHECK_THROWS_AS(reparameterize_wavelet(c, mask, NoiseScale{}, std::vector<double>{1}), ShapeError);
}

TEST_CASE("noise-scale gradient identity") {
    // For L(c~) = sum_i w_i c~_i^2 the gradient wrt rho_detail is
    // sum over detail i of dL/dc~_i * eps_i * s.
    Rng rng(31);
    const auto c = oracle::random_vector(12, rng);
    const auto w = oracle::random_vector(12, rng, 0.5, 2.0);
    const auto eps = oracle::random_vector(12, rng, -2, 2);
    Mask mask(12, 1);
    mask[0] = mask[1] = mask[2] = 0;
    NoiseScale scales{std::log(0.3), std::log(0.2), true};

    auto loss = [&](const NoiseScale& sc) {
        const auto s = reparameterize_wavelet(c, mask, sc, eps);
        double l = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) l += w[i] * s.c_tilde[i] * s.c_tilde[i];
        return l;
    };
    const auto sample = reparameterize_wavelet(c, mask, scales, eps);
    double analytic_detail = 0.0, analytic_approx = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double g = 2.0 * w[i] * sample.c_tilde[i];
        if (mask[i]) analytic_detail += g * eps[i] * scales.s_detail();
        else analytic_approx += g * eps[i] * scales.s_approx();
    }
    const double h = 1e-6;
    NoiseScale up = scales, down = scales;
    up.rho_detail += h;
    down.rho_detail -= h;
    CHECK((loss(up) - loss(down)) / (2 * h) == doctest::Approx(analytic_detail).epsilon(1e-7));
    up = down = scales;
    up.rho_approx += h;
    down.rho_approx -= h;
    CHECK((loss(up) - loss(down)) / (2 * h) == doctest::Approx(analytic_approx).epsilon(1e-7));
}

TEST_CASE("closed-form KL") {
    CHECK(kl_gaussian_standard(GaussianPosterior{{0, 0, 0}, {0, 0, 0}}) == 0.0);
    CHECK(std::abs(kl_gaussian_standard(GaussianPosterior{{2}, {0}}) - 2.0) <= 1e-12);
    CHECK(std::abs(kl_gaussian_standard(GaussianPosterior{{0}, {1}}) - (std::exp(1.0) - 2.0) / 2.0) <= 1e-12);
    CHECK(kl_gaussian_standard(GaussianPosterior{{0}, {1}}) == doctest::Approx(0.359140914229522).epsilon(1e-12));

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mu = oracle::random_vector(4, rng, -2, 2);
        const auto lv = oracle::random_vector(4, rng, -3, 3);
        CHECK(kl_gaussian_standard(GaussianPosterior{mu, lv}) >= 0.0);
        // Additive over dimensions.
        double parts = 0.0;
        for (std::size_t i = 0; i < 4; ++i) parts += kl_gaussian_standard(GaussianPosterior{{mu[i]}, {lv[i]}});
        CHECK(kl_gaussian_standard(GaussianPosterior{mu, lv}) == doctest::Approx(parts).epsilon(1e-14));
    }
    CHECK_THROWS_AS(kl_gaussian_standard(GaussianPosterior{{0}, {}}), ShapeError);
}

TEST_CASE("closed-form KL matches Monte Carlo") {
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases = {
        {{0.0}, {1.0}},
        {{2.0, -1.0}, {0.0, -0.5}},
        {{0.1, 0.2, -0.3, 0.4, 1.0, -1.5, 0.0, 0.7}, {0.2, -1.0, 0.5, 0.0, -2.0, 0.3, 1.2, -0.4}},
    };
    std::uint64_t seed = 1000;
    for (const auto& [mu, lv] : cases) {
        const auto mc = oracle::kl_monte_carlo(mu, lv, 100000, seed++);
        const double exact = kl_gaussian_standard(GaussianPosterior{mu, lv});
        CHECK(std::abs(mc.mean - exact) <= 3.0 * mc.standard_error);
    }
}

TEST_CASE("laplace log prior") {
    CHECK(laplace_log_prior(std::vector<double>{0}, 2.0) == 0.0);
    CHECK(laplace_log_prior(std::vector<double>{1, -1}, 1.0) == doctest::Approx(2 * std::log(0.5) - 2).epsilon(1e-15));
    CHECK(laplace_log_prior(std::vector<double>{1, -1}, 1.0) == doctest::Approx(-3.386294361119891).epsilon(1e-14));
    CHECK_THROWS_AS(laplace_log_prior(std::vector<double>{1}, 0.0), DomainError);
    CHECK_THROWS_AS(laplace_log_prior(std::vector<double>{1}, -1.0), DomainError);

    // Negative log prior differs from the L1 penalty by a constant.
    const std::vector<double> a{0.3, -0.2}, b{1.0, 0.5};
    const Mask all{1, 1};
    const double lambda = 0.7;
    CHECK(-laplace_log_prior(a, lambda) + laplace_log_prior(b, lambda) ==
          doctest::Approx(l1_detail_penalty(a, all, lambda) - l1_detail_penalty(b, all, lambda)).epsilon(1e-14));
}

TEST_CASE("L1 detail penalty") {
    Rng rng(8);
    const auto c = oracle::random_vector(10, rng);
    CHECK(l1_detail_penalty(c, Mask(10, 1), 0.0) == 0.0);
    CHECK(l1_detail_penalty(std::vector<double>{0.5, -0.25, 0}, Mask{1, 1, 1}, 2.0) == 1.5);
    CHECK(l1_detail_penalty(std::vector<double>{3, -2, 0, 0}, Mask{0, 0, 1, 1}, 5.0) == 0.0);
    CHECK(l1_detail_penalty(std::vector<double>{9, 0.5, -0.25, 0}, Mask{0, 1, 1, 1}, 2.0) == 1.5);
    CHECK_THROWS_AS(l1_detail_penalty(c, Mask(9, 1), 1.0), ShapeError);
    CHECK_THROWS_AS(l1_detail_penalty(c, Mask(10, 1), -1.0), DomainError);

    std::vector<double> grad(4, 0.0);
    add_l1_detail_grad(std::vector<double>{2, -1, 0, 3}, Mask{0, 1, 1, 1}, 0.5, grad);
    CHECK(grad == std::vector<double>{0, -0.5, 0, 0.5});
}

TEST_CASE("WVAE and VAE objectives") {
    const Image x = row({0.2, 0.9, 0.4});
    const auto same = wvae_loss(x, x, std::vector<double>{1, 2, 3}, Mask{0, 1, 1}, 0.0);
    CHECK(same.total == 0.0);

    const auto half = wvae_loss(row({0, 1}), row({1, 1}), std::vector<double>{4, 7}, Mask{0, 0}, 0.3);
    CHECK(half.reconstruction == 0.5);
    CHECK(half.regularizer == 0.0);
    CHECK(half.total == 0.5);

    const auto with_l1 = wvae_loss(row({0, 1}), row({1, 1}), std::vector<double>{0.5, -0.25}, Mask{1, 1}, 2.0);
    CHECK(with_l1.total == doctest::Approx(0.5 + 1.5).epsilon(1e-15));

    const GaussianPosterior prior_like{{0, 0}, {0, 0}};
    const GaussianPosterior shifted{{2}, {0}};
    CHECK(vae_loss(row({0, 1}), row({1, 1}), shifted, 0.0).total == 0.5);
    CHECK(vae_loss(row({0, 1}), row({1, 1}), prior_like, 1.0).total == 0.5);
    const auto combined = vae_loss(row({0, 1}), row({1, 1}), shifted, 1.0);
    CHECK(combined.regularizer == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(combined.total == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(vae_loss(row({0, 1}), row({1, 1}), shifted, 0.5).total == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(vae_loss(x, x, shifted, -1.0), DomainError);

    const auto bce_half = wvae_loss(row({0.5}), row({0.5}), std::vector<double>{0}, Mask{0}, 0.0, ReconstructionLoss::bce);
    CHECK(bce_half.total == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(wvae_loss(row({0, 1}), row({1}), std::vector<double>{0}, Mask{0}, 0.0), ShapeError);
}

TEST_CASE("loss derivatives match finite differences") {
    Rng rng(77);
    for (auto kind : {ReconstructionLoss::mse, ReconstructionLoss::bce}) {
        Image x(2, 3, 1), y(2, 3, 1);
        for (auto& v : x.values) v = rng.uniform();
        for (auto& v : y.values) v = rng.uniform(0.1, 0.9);
        const auto g = reconstruction_loss_grad(x, y, kind);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double h = 1e-6;
            Image up = y, down = y;
            up.values[i] += h;
            down.values[i] -= h;
            const double fd = (reconstruction_loss(x, up, kind) - reconstruction_loss(x, down, kind)) / (2 * h);
            CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
        }
    }

    const GaussianPosterior post{{0.4, -1.2}, {0.3, -0.8}};
    std::vector<double> gm(2, 0.0), gl(2, 0.0);
    add_kl_grad(post, 2.0, gm, gl);
    for (std::size_t i = 0; i < 2; ++i) {
        const double h = 1e-6;
        auto bump = [&](bool on_mu, double d) {
            GaussianPosterior p = post;
            (on_mu ? p.mu : p.logvar)[i] += d;
            return 2.0 * kl_gaussian_standard(p);
        };
        CHECK(gm[i] == doctest::Approx((bump(true, h) - bump(true, -h)) / (2 * h)).epsilon(1e-7));
        CHECK(gl[i] == doctest::Approx((bump(false, h) - bump(false, -h)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("reconstruction loss names") {
    CHECK(to_string(ReconstructionLoss::mse) == "mse");
    CHECK(reconstruction_loss_from_string("bce") == ReconstructionLoss::bce);
    CHECK_THROWS_AS(reconstruction_loss_from_string("l2"), ConfigError);
}
