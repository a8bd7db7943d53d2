#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wvae/errors.hpp"
#include "wvae/eval.hpp"
#include "wvae/random.hpp"

using namespace wvae;

namespace {

Image row(std::initializer_list<double> v) {
    Image img(1, v.size(), 1);
    std::copy(v.begin(), v.end(), img.values.begin());
    return img;
}

Image checkerboard(std::size_t n) {
    Image img(n, n, 1);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) img.at(0, y, x) = static_cast<double>((x + y) % 2);
    }
    return img;
}

// Window statistics from raw moments: E[xy] - E[x]E[y] etc.
double ssim_oracle(const Image& a, const Image& b) {
    const std::size_t h = a.height, w = a.width, win = 8;
    auto gray = [&](const Image& img, std::size_t y, std::size_t x) {
        double s = 0.0;
        for (std::size_t c = 0; c < img.channels; ++c) s += img.at(c, y, x);
        return s / static_cast<double>(img.channels);
    };
    const double c1 = 1e-4, c2 = 9e-4;
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t i = 0; i + win <= h; ++i) {
        for (std::size_t j = 0; j + win <= w; ++j) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t y = i; y < i + win; ++y) {
                for (std::size_t x = j; x < j + win; ++x) {
                    const double p = gray(a, y, x), q = gray(b, y, x);
                    sa += p;
                    sb += q;
                    saa += p * p;
                    sbb += q * q;
                    sab += p * q;
                }
            }
            const double n = 64.0;
            const double ma = sa / n, mb = sb / n;
            const double va = saa / n - ma * ma, vb = sbb / n - mb * mb, cov = sab / n - ma * mb;
            const double lum = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
            const double cs = (2 * cov + c2) / (va + vb + c2);
            total += lum * cs;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

}  // namespace

TEST_CASE("mse") {
    Rng rng(1);
    const Image x = oracle::random_image(4, 5, 2, rng), y = oracle::random_image(4, 5, 2, rng);
    CHECK(mse(x, x) == 0.0);
    CHECK(mse(row({0, 1}), row({1, 1})) == 0.5);
    CHECK(mse(x, y) == mse(y, x));
    double brute = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) brute += (x.values[i] - y.values[i]) * (x.values[i] - y.values[i]);
    CHECK(mse(x, y) == doctest::Approx(brute / 40.0).epsilon(1e-14));
    CHECK_THROWS_AS(mse(x, Image(4, 5, 1)), ShapeError);
}

TEST_CASE("bce") {
    CHECK(bce(row({0.5}), row({0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(bce(row({1.0}), row({1.0 - 1e-12})) < 1e-6);
    const double clamped = bce(row({1, 0}), row({0, 1}));
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));
    CHECK(bce(row({0.2, 0.7}), row({0.4, 0.6})) ==
          doctest::Approx(-(0.2 * std::log(0.4) + 0.8 * std::log(0.6) + 0.7 * std::log(0.6) + 0.3 * std::log(0.4)) / 2)
              .epsilon(1e-14));
}

TEST_CASE("ssim") {
    Rng rng(2);
    const Image x = oracle::random_image(12, 10, 3, rng), y = oracle::random_image(12, 10, 3, rng);
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)).epsilon(1e-14));
    CHECK(ssim(x, y) == doctest::Approx(ssim_oracle(x, y)).epsilon(1e-10));

    const Image board = checkerboard(8);
    Image inverse = board;
    for (auto& v : inverse.values) v = 1.0 - v;
    const double s = ssim(board, inverse);
    CHECK(s < 0.0);
    CHECK(s == doctest::Approx(ssim_oracle(board, inverse)).epsilon(1e-10));

    CHECK_THROWS_AS(ssim(Image(7, 8, 1), Image(7, 8, 1)), ShapeError);
    CHECK_THROWS_AS(ssim(Image(8, 8, 1), Image(8, 9, 1)), ShapeError);
}

TEST_CASE("sparsity_stats") {
    const auto zero = dwt2d_multi(Image(4, 4, 1), 2);
    const auto z = sparsity_stats(zero);
    CHECK(z.detail_l1_mean == 0.0);
    CHECK(z.near_zero_fraction == 1.0);

    auto p = dwt2d_multi(Image(4, 4, 1), 1);
    for (Image* band : {&p.details[0].hl, &p.details[0].lh, &p.details[0].hh}) band->values = {1, 0, 0, 0};
    const auto s = sparsity_stats(p, 0.5);
    CHECK(s.detail_l1_mean == 0.25);
    CHECK(s.near_zero_fraction == 0.75);

    for (Image* band : {&p.details[0].hl, &p.details[0].lh, &p.details[0].hh}) band->values[0] = -1;
    const auto flipped = sparsity_stats(p, 0.5);
    CHECK(flipped.detail_l1_mean == s.detail_l1_mean);
    CHECK(flipped.near_zero_fraction == s.near_zero_fraction);

    // Approximation coefficients never count.
    p.approx.values.assign(p.approx.size(), 100.0);
    CHECK(sparsity_stats(p, 0.5).detail_l1_mean == 0.25);
    CHECK_THROWS_AS(sparsity_stats(p, 0.0), DomainError);
}

TEST_CASE("hf_energy_ratio") {
    CHECK(hf_energy_ratio(Image(8, 8, 3, 0.4), 2) == 0.0);
    CHECK(hf_energy_ratio(Image(8, 8, 1), 2) == 0.0);

    Image impulse(4, 4, 1);
    impulse.at(0, 0, 0) = 1.0;
    CHECK(hf_energy_ratio(impulse, 1) == doctest::Approx(0.75).epsilon(1e-14));
    // Two levels: LL_2 carries 1/16 of the energy.
    CHECK(hf_energy_ratio(impulse, 2) == doctest::Approx(15.0 / 16.0).epsilon(1e-14));

    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Image img = oracle::random_image(16, 16, 1, rng);
        const double r = hf_energy_ratio(img, 2);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        // A 2x2 box blur aligned with the Haar blocks removes all level-1 detail.
        Image blurred = img;
        for (std::size_t y = 0; y < 16; y += 2) {
            for (std::size_t x = 0; x < 16; x += 2) {
                const double m = (img.at(0, y, x) + img.at(0, y + 1, x) + img.at(0, y, x + 1) + img.at(0, y + 1, x + 1)) / 4;
                blurred.at(0, y, x) = blurred.at(0, y + 1, x) = blurred.at(0, y, x + 1) = blurred.at(0, y + 1, x + 1) = m;
            }
        }
        CHECK(hf_energy_ratio(blurred, 2) < r);
    }
}

TEST_CASE("evaluate and average") {
    Rng rng(4);
    const Image x = oracle::random_image(8, 8, 1, rng), y = oracle::random_image(8, 8, 1, rng);
    const auto r = evaluate(x, y, 2);
    CHECK(r.mse == mse(x, y));
    REQUIRE(r.bce.has_value());
    CHECK(*r.bce == bce(x, y));
    REQUIRE(r.ssim.has_value());
    CHECK(*r.ssim == ssim(x, y));
    CHECK(r.hf_energy_ratio == hf_energy_ratio(y, 2));
    CHECK(r.detail_l1_mean == sparsity_stats(dwt2d_multi(y, 2)).detail_l1_mean);

    const auto small = evaluate(Image(4, 4, 1, 0.2), Image(4, 4, 1, 0.3), 1);
    CHECK_FALSE(small.ssim.has_value());
    CHECK(to_json(small)["ssim"].is_null());
    CHECK(to_json(r)["mse"].get<double>() == r.mse);

    const MetricReport reports[] = {r, evaluate(y, x, 2)};
    const auto mean = average(reports);
    CHECK(mean.mse == doctest::Approx(r.mse).epsilon(1e-15));
    CHECK(*mean.ssim == doctest::Approx(*r.ssim).epsilon(1e-14));
    CHECK(mean.hf_energy_ratio == doctest::Approx((hf_energy_ratio(y, 2) + hf_energy_ratio(x, 2)) / 2).epsilon(1e-14));

    const MetricReport mixed[] = {r, small};
    CHECK_FALSE(average(mixed).ssim.has_value());
}
