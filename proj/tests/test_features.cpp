#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "moist/features.hpp"
#include "oracles.hpp"

using namespace moist;

namespace {

GrayImage from_rows(const std::vector<std::vector<int>>& rows) {
    const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows[0].size());
    std::vector<std::uint8_t> px;
    for (const auto& r : rows)
        for (int v : r)
            px.push_back(static_cast<std::uint8_t>(v));
    return GrayImage(w, h, px);
}

QuantizedImage qrows(const std::vector<std::vector<int>>& rows, int levels) {
    const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows[0].size());
    std::vector<int> v;
    for (const auto& r : rows)
        v.insert(v.end(), r.begin(), r.end());
    return QuantizedImage(w, h, levels, v);
}

// 128 + 100 cos(2 pi f x / w), constant along y.
GrayImage horizontal_cosine(int size, int freq) {
    std::vector<std::uint8_t> px;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            px.push_back(static_cast<std::uint8_t>(
                std::lround(128.0 + 100.0 * std::cos(2.0 * std::numbers::pi * freq * x / size))));
    return GrayImage(size, size, px);
}

void check_all_close(const std::vector<double>& got, const std::vector<double>& want, double rel) {
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
        INFO("feature " << k << " got " << got[k] << " want " << want[k]);
        CHECK(oracle::close(got[k], want[k], rel));
    }
}

}  // namespace

TEST_SUITE("glcm") {
    TEST_CASE("hand-enumerated matrices") {
        const Glcm a = glcm(qrows({{0, 0}, {1, 1}}, 2), 1, 0);
        CHECK(a.at(0, 0) == doctest::Approx(0.5));
        CHECK(a.at(1, 1) == doctest::Approx(0.5));
        CHECK(a.at(0, 1) == 0.0);
        CHECK(a.at(1, 0) == 0.0);

        const Glcm b = glcm(qrows({{0, 1}, {1, 0}}, 2), 1, 0);
        CHECK(b.at(0, 1) == doctest::Approx(0.5));
        CHECK(b.at(1, 0) == doctest::Approx(0.5));
        CHECK(b.at(0, 0) == 0.0);

        const Glcm c = glcm(quantize(GrayImage(5, 4, std::uint8_t{77}), 32), -1, 1);
        const int lvl = 77 * 32 / 256;
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j)
                CHECK(c.at(i, j) == (i == lvl && j == lvl ? 1.0 : 0.0));
    }

    TEST_CASE("argument errors") {
        const QuantizedImage q = qrows({{0, 1}, {1, 0}}, 2);
        CHECK_THROWS_AS(glcm(q, 0, 0), std::invalid_argument);
        CHECK_THROWS_AS(glcm(q, 2, 0), std::invalid_argument);
    }

    TEST_CASE("normalized and symmetric for random images and offsets") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> off(-3, 3);
        for (int trial = 0; trial < 100; ++trial) {
            const QuantizedImage q = quantize(oracle::random_image(rng, 8 + trial % 5, 8), 32);
            int dx = 0, dy = 0;
            while (dx == 0 && dy == 0) {
                dx = off(rng);
                dy = off(rng);
            }
            const Glcm m = glcm(q, dx, dy);
            double sum = 0;
            for (int i = 0; i < m.levels; ++i)
                for (int j = 0; j < m.levels; ++j) {
                    sum += m.at(i, j);
                    REQUIRE(m.at(i, j) == m.at(j, i));
                }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_SUITE("haralick") {
    TEST_CASE("constant image") {
        const FeatureVector f = haralick_features(GrayImage(8, 8, std::uint8_t{90}));
        REQUIRE(f.size() == 13);
        CHECK(f.values[0] == 1.0);  // ASM
        CHECK(f.values[1] == 0.0);  // contrast
        CHECK(f.values[8] == 0.0);  // entropy
    }

    TEST_CASE("checkerboard contrast") {
        std::vector<std::vector<int>> rows(8, std::vector<int>(8));
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                rows[y][x] = (x + y) % 2 ? 255 : 0;
        const QuantizedImage q = quantize(from_rows(rows), 32);
        CHECK(haralick_statistics(glcm(q, 1, 0))[1] == 31.0 * 31.0);
        CHECK(haralick_statistics(glcm(q, 0, 1))[1] == 31.0 * 31.0);
        CHECK(haralick_statistics(glcm(q, 1, 1))[1] == 0.0);
        CHECK(haralick_features(from_rows(rows)).values[1] == doctest::Approx(31.0 * 31.0 / 2.0));
    }

    TEST_CASE("matches pair-enumerating reference") {
        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 30; ++trial) {
            const GrayImage img = oracle::random_image(rng);
            check_all_close(haralick_features(img).values, oracle::haralick(img), 1e-9);
        }
    }
}

TEST_SUITE("fos") {
    TEST_CASE("constant image") {
        const FeatureVector f = fos_features(GrayImage(8, 8, std::uint8_t{7}));
        REQUIRE(f.size() == 16);
        CHECK(f.values[0] == 7.0);
        CHECK(f.values[1] == 0.0);
        CHECK(f.values[2] == 7.0);
        CHECK(f.values[3] == 7.0);
        CHECK(f.values[4] == 0.0);
        CHECK(f.values[5] == 0.0);
        CHECK(f.values[6] == 49.0 * 64);
        CHECK(f.values[7] == 0.0);
        CHECK(f.values[10] == 0.0);
        CHECK(f.values[15] == 0.0);
    }

    TEST_CASE("half black half white") {
        std::vector<std::uint8_t> px(64, 0);
        std::fill(px.begin() + 32, px.end(), 255);
        const FeatureVector f = fos_features(GrayImage(8, 8, px));
        CHECK(f.values[0] == 127.5);
        CHECK(f.values[7] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(f.values[15] == 255.0);
        CHECK(f.values[2] == 127.5);  // median interpolates the two middle ranks
        CHECK(f.values[3] == 0.0);    // tie between 0 and 255 goes to the lower value
        CHECK(f.values[4] == doctest::Approx(0.0));
        CHECK(f.values[5] == doctest::Approx(1.0));
    }

    TEST_CASE("percentile interpolation") {
        const std::vector<double> s = {1, 2, 3, 4};
        CHECK(percentile_sorted(s, 0.0) == 1.0);
        CHECK(percentile_sorted(s, 1.0) == 4.0);
        CHECK(percentile_sorted(s, 0.5) == 2.5);
        CHECK(percentile_sorted(s, 0.25) == doctest::Approx(1.75));
    }

    TEST_CASE("matches sorting/counting reference") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 30; ++trial) {
            const GrayImage img = oracle::random_image(rng);
            check_all_close(fos_features(img).values, oracle::fos(img), 1e-9);
        }
    }
}

TEST_SUITE("fourier") {
    TEST_CASE("constant image has no power after DC removal") {
        const PowerSpectrum ps = power_spectrum(GrayImage(8, 6, std::uint8_t{200}));
        for (double p : ps.power)
            CHECK(p == doctest::Approx(0.0).scale(1e6));
        for (double v : fps_features(GrayImage(8, 8, std::uint8_t{200})).values)
            CHECK(v == doctest::Approx(0.0).scale(1e6));
    }

    TEST_CASE("exact cosine concentrates in two symmetric cells") {
        // Period 4 samples to exact integers, so the spectrum is two spikes.
        const GrayImage img = horizontal_cosine(16, 4);
        const PowerSpectrum ps = power_spectrum(img);
        const double spike = ps.at(8 + 4, 8);
        CHECK(spike == doctest::Approx(std::pow(100.0 * 256 / 2, 2)).epsilon(1e-12));
        CHECK(ps.at(8 - 4, 8) == doctest::Approx(spike).epsilon(1e-12));
        double rest = 0;
        for (int v = 0; v < 16; ++v)
            for (int u = 0; u < 16; ++u)
                if (!(v == 8 && (u == 4 || u == 12)))
                    rest += ps.at(u, v);
        CHECK(rest <= 1e-9 * spike);
    }

    TEST_CASE("rounded cosine at u=2 keeps nearly all energy in two cells") {
        const PowerSpectrum ps = power_spectrum(horizontal_cosine(16, 2));
        double total = 0;
        for (double p : ps.power)
            total += p;
        const double pair = ps.at(8 + 2, 8) + ps.at(8 - 2, 8);
        CHECK(ps.at(10, 8) == doctest::Approx(ps.at(6, 8)).epsilon(1e-12));
        CHECK(pair / total > 0.999);
    }

    TEST_CASE("cosine fps energy sits in one ring and the zero-angle sector") {
        const GrayImage img = horizontal_cosine(16, 4);
        const FeatureVector f = fps_features(img);
        double total = 0;
        for (int k = 0; k < kRadialBins; ++k)
            total += f.values[k];
        int occupied = 0;
        for (int k = 0; k < kRadialBins; ++k)
            if (f.values[k] > 1e-9 * total)
                ++occupied;
        CHECK(occupied == 1);
        CHECK(f.values[kRadialBins] == doctest::Approx(total).epsilon(1e-12));
        for (int k = 1; k < kAngularBins; ++k)
            CHECK(f.values[kRadialBins + k] <= 1e-9 * total);
    }

    TEST_CASE("spectrum matches direct DFT and satisfies Parseval") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            const int w = 6 + trial % 4, h = 8 - trial % 3;  // includes non power-of-two sizes
            const GrayImage img = oracle::random_image(rng, w, h);
            const PowerSpectrum ps = power_spectrum(img, true);
            const auto want = oracle::center(oracle::naive_power(img), w, h);
            check_all_close(ps.power, want, 1e-6);

            double lhs = 0, rhs = 0;
            for (double p : ps.power)
                lhs += p;
            for (auto v : img.pixels())
                rhs += double(v) * v;
            CHECK(oracle::close(lhs, rhs * w * h, 1e-6));
        }
    }

    TEST_CASE("spectrum is point symmetric about the center") {
        std::mt19937_64 rng(4);
        const GrayImage img = oracle::random_image(rng, 16, 16);
        const PowerSpectrum ps = power_spectrum(img, true);
        for (int v = 1; v < 16; ++v)
            for (int u = 1; u < 16; ++u)
                CHECK(oracle::close(ps.at(u, v), ps.at(16 - u, 16 - v), 1e-6));
    }

    TEST_CASE("fps bins match reference binning exactly and naive DFT closely") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            const GrayImage img = oracle::random_image(rng);
            const auto got = fps_features(img).values;
            const auto exact = oracle::fps_bins(power_spectrum(img).power, 8, 8);
            for (std::size_t k = 0; k < got.size(); ++k)
                CHECK(got[k] == exact[k]);
            check_all_close(got, oracle::fps(img), 1e-6);
        }
    }
}

TEST_SUITE("glrlm") {
    TEST_CASE("hand-enumerated run matrices") {
        const RunLengthMatrix a = glrlm(qrows({{0, 0, 1, 1}}, 2), RunDirection::Deg0);
        CHECK(a.total_runs == 2);
        CHECK(a.at(0, 2) == 1);
        CHECK(a.at(1, 2) == 1);
        const auto s = glrlm_statistics(a);
        CHECK(s[0] == 0.25);
        CHECK(s[1] == 4.0);
        CHECK(s[4] == 0.5);
        CHECK(s[5] == doctest::Approx(0.5 * (1.0 + 0.25)));  // levels 1 and 2 after 1-basing
        CHECK(s[6] == doctest::Approx(0.5 * (1.0 + 4.0)));

        const RunLengthMatrix b = glrlm(qrows({{3, 3, 3, 3}}, 4), RunDirection::Deg0);
        CHECK(b.total_runs == 1);
        CHECK(b.at(3, 4) == 1);

        const RunLengthMatrix c = glrlm(qrows({{0, 1}, {1, 0}}, 2), RunDirection::Deg0);
        CHECK(c.total_runs == 4);
        CHECK(c.at(0, 1) == 2);
        CHECK(c.at(1, 1) == 2);

        // The anti-diagonal of [[0,1],[1,0]] is a single run of 1s.
        const RunLengthMatrix d = glrlm(qrows({{0, 1}, {1, 0}}, 2), RunDirection::Deg45);
        CHECK(d.total_runs == 3);
        CHECK(d.at(1, 2) == 1);
    }

    TEST_CASE("constant image: one run per row") {
        const QuantizedImage q = quantize(GrayImage(6, 4, std::uint8_t{10}), 32);
        const auto s = glrlm_statistics(glrlm(q, RunDirection::Deg0));
        CHECK(s[1] == doctest::Approx(36.0));
        CHECK(s[0] == doctest::Approx(1.0 / 36.0));
        const auto v = glrlm_statistics(glrlm(q, RunDirection::Deg90));
        CHECK(v[1] == doctest::Approx(16.0));
    }

    TEST_CASE("runs cover every pixel exactly once") {
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 100; ++trial) {
            const GrayImage img = oracle::random_image(rng, 5 + trial % 7, 4 + trial % 5);
            const QuantizedImage q = quantize(img, 2 + trial % 8);
            for (RunDirection d : {RunDirection::Deg0, RunDirection::Deg45, RunDirection::Deg90, RunDirection::Deg135}) {
                const RunLengthMatrix m = glrlm(q, d);
                long covered = 0, runs = 0;
                for (int i = 0; i < m.levels; ++i)
                    for (int j = 1; j <= m.max_run; ++j) {
                        covered += j * m.at(i, j);
                        runs += m.at(i, j);
                    }
                REQUIRE(covered == static_cast<long>(img.size()));
                REQUIRE(runs == m.total_runs);
            }
        }
    }

    TEST_CASE("matches run-enumerating reference") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 30; ++trial) {
            const GrayImage img = oracle::random_image(rng);
            check_all_close(glrlm_features(img).values, oracle::glrlm(img), 1e-9);
        }
    }
}

TEST_SUITE("lbp") {
    TEST_CASE("uniform rotation-invariant mapping") {
        CHECK(uniform_ri_bin(0b00000000, 8) == 0);
        CHECK(uniform_ri_bin(0b11111111, 8) == 8);
        CHECK(uniform_ri_bin(0b00011100, 8) == 3);
        CHECK(uniform_ri_bin(0b10000001, 8) == 2);  // wraps around
        CHECK(uniform_ri_bin(0b01010000, 8) == 9);
    }

    TEST_CASE("constant image is all-ones everywhere") {
        const GrayImage img(9, 9, std::uint8_t{42});
        for (auto [r, p] : {std::pair{1, 8}, std::pair{2, 16}, std::pair{3, 24}}) {
            const LbpHistogram h = lbp_histogram(img, r, p);
            REQUIRE(h.bins.size() == static_cast<std::size_t>(p + 2));
            for (int k = 0; k < p + 2; ++k)
                CHECK(h.bins[k] == (k == p ? 1.0 : 0.0));
        }
        const FeatureVector f = lbp_features(img);
        for (int k = 0; k < 6; ++k)
            CHECK(f.values[k] == (k % 2 == 0 ? 1.0 : 0.0));
    }

    TEST_CASE("energy and entropy of a uniform histogram") {
        for (int bins : {2, 10, 26}) {
            const std::vector<double> h(bins, 1.0 / bins);
            CHECK(histogram_energy(h) == doctest::Approx(1.0 / bins).epsilon(1e-12));
            CHECK(histogram_entropy(h) == doctest::Approx(std::log(double(bins))).epsilon(1e-12));
        }
    }

    TEST_CASE("image too small for radius") {
        CHECK_THROWS_AS(lbp_histogram(GrayImage(6, 9, std::uint8_t{0}), 3, 24), std::invalid_argument);
        CHECK_NOTHROW(lbp_histogram(GrayImage(7, 7, std::uint8_t{0}), 3, 24));
    }

    TEST_CASE("matches per-pixel reference exactly") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 30; ++trial) {
            const GrayImage img = oracle::random_image(rng);
            const auto got = lbp_histogram(img, 1, 8).bins;
            const auto want = oracle::lbp_hist(img, 1, 8);
            REQUIRE(got.size() == want.size());
            double sum = 0;
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k] == want[k]);
                sum += got[k];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
        for (int trial = 0; trial < 10; ++trial) {
            const GrayImage img = oracle::random_image(rng, 16, 16);
            check_all_close(lbp_features(img).values, oracle::lbp(img), 1e-12);
        }
    }

    TEST_CASE("brightness offset leaves histograms unchanged") {
        std::mt19937_64 rng(9);
        std::uniform_int_distribution<int> d(0, 200);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::uint8_t> px(256), shifted(256);
            for (int i = 0; i < 256; ++i) {
                px[i] = static_cast<std::uint8_t>(d(rng));
                shifted[i] = static_cast<std::uint8_t>(px[i] + 55);
            }
            CHECK(lbp_features(GrayImage(16, 16, px)) == lbp_features(GrayImage(16, 16, shifted)));
        }
    }
}

TEST_SUITE("combined") {
    TEST_CASE("63 features in family order") {
        std::mt19937_64 rng(10);
        const GrayImage img = oracle::random_image(rng, 12, 10);
        const FeatureVector f = combined_features(img);
        REQUIRE(f.size() == 63);
        REQUIRE(f.names.size() == 63);
        std::size_t at = 0;
        for (FeatureFamily fam : {FeatureFamily::Haralick, FeatureFamily::Fos, FeatureFamily::Fps,
                                  FeatureFamily::Glrlm, FeatureFamily::Lbp}) {
            const FeatureVector part = extract_features(img, fam);
            for (std::size_t k = 0; k < part.size(); ++k, ++at) {
                CHECK(f.names[at] == part.names[k]);
                CHECK(f.values[at] == part.values[k]);
            }
        }
        CHECK(at == 63);
        for (double v : f.values)
            CHECK(std::isfinite(v));
    }

    TEST_CASE("family sizes and unique names") {
        CHECK(feature_names(FeatureFamily::Haralick).size() == 13);
        CHECK(feature_names(FeatureFamily::Fos).size() == 16);
        CHECK(feature_names(FeatureFamily::Fps).size() == 17);
        CHECK(feature_names(FeatureFamily::Glrlm).size() == 11);
        CHECK(feature_names(FeatureFamily::Lbp).size() == 6);
        auto names = feature_names(FeatureFamily::Combined);
        std::sort(names.begin(), names.end());
        CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
        for (FeatureFamily f : all_families())
            CHECK(parse_family(family_name(f)) == f);
        CHECK_FALSE(parse_family("gabor").has_value());
    }

    TEST_CASE("constant image anchors and purity") {
        const GrayImage img(8, 8, std::uint8_t{33});
        const FeatureVector a = combined_features(img);
        const FeatureVector b = combined_features(img);
        CHECK(a == b);
        CHECK(a.names[0] == "Haralick_AngularSecondMoment");
        CHECK(a.values[0] == 1.0);
        CHECK(a.names[14] == "FOS_Variance");
        CHECK(a.values[14] == 0.0);
        CHECK_THROWS_AS(combined_features(GrayImage(7, 8, std::uint8_t{0})), std::invalid_argument);
    }

    TEST_CASE("shipped manifest matches the compiled name lists") {
        std::ifstream in(std::string(MOIST_SOURCE_DIR) + "/data/feature_manifest.json");
        REQUIRE(in.good());
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == feature_manifest_json());
    }
}
