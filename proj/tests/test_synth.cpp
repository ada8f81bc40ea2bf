#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "moist/features.hpp"
#include "moist/synth.hpp"

using namespace moist;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Share of radial spectrum power in the outer rings.
double high_frequency_share(const GrayImage& img) {
    const FeatureVector f = fps_features(img);
    double low = 0, high = 0;
    for (int k = 0; k < kRadialBins; ++k)
        (k < 3 ? low : high) += f.values[k];
    return high / (low + high);
}

}  // namespace

TEST_CASE("generated images are deterministic") {
    const ClassSpec& cls = default_classes()[1];
    const GrayImage a = generate_image(target_domain(Shift::Strong), cls, 64, 99);
    CHECK(a == generate_image(target_domain(Shift::Strong), cls, 64, 99));
    CHECK_FALSE(a == generate_image(target_domain(Shift::Strong), cls, 64, 100));
    CHECK(a.width() == 64);
    CHECK(a.height() == 64);
}

TEST_CASE("domain transforms change the image") {
    const ClassSpec& cls = default_classes()[0];
    const GrayImage plain = generate_image(DomainSpec{}, cls, 48, 5);
    for (Shift s : {Shift::Mild, Shift::Strong})
        CHECK_FALSE(plain == generate_image(target_domain(s), cls, 48, 5));
    CHECK(plain == generate_image(target_domain(Shift::None), cls, 48, 5));
}

TEST_CASE("wet textures carry more high-frequency power than dry ones") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GrayImage dry = generate_image(DomainSpec{}, default_classes()[0], 64, seed);
        const GrayImage wet = generate_image(DomainSpec{}, default_classes()[2], 64, seed);
        CHECK(high_frequency_share(wet) > high_frequency_share(dry));
    }
}

TEST_CASE("generator argument checks") {
    CHECK_THROWS_AS(generate_image(DomainSpec{}, default_classes()[0], 31, 1), std::invalid_argument);
    DomainSpec bad;
    bad.gamma = 0;
    CHECK_THROWS_AS(generate_image(bad, default_classes()[0], 32, 1), std::invalid_argument);
    bad = DomainSpec{};
    bad.contrast_gain = -1;
    CHECK_THROWS_AS(generate_image(bad, default_classes()[0], 32, 1), std::invalid_argument);
    CHECK(parse_shift("strong") == Shift::Strong);
    CHECK_FALSE(parse_shift("extreme"));
}

TEST_CASE("scenario layout and determinism") {
    const auto root = std::filesystem::temp_directory_path() / "moist_synth_test";
    std::filesystem::remove_all(root);
    const ScenarioSummary s = generate_scenario(Shift::Mild, 10, 3, root / "a", 32);
    CHECK(s.images == 60);
    REQUIRE(s.label_files.size() == 2);

    int rows = 0;
    for (const auto& f : s.label_files) {
        std::ifstream in(f);
        std::string line;
        std::getline(in, line);
        CHECK(line == "id,domain,label");
        while (std::getline(in, line))
            ++rows;
    }
    CHECK(rows == 2 * 3 * 10);
    CHECK(std::filesystem::exists(root / "a" / "source" / "img_Dry_000.png"));
    CHECK(std::filesystem::exists(root / "a" / "target" / "img_Wet_009.png"));
    CHECK(load_image(root / "a" / "target" / "img_Medium_004.png").width() == 32);

    generate_scenario(Shift::Mild, 10, 3, root / "b", 32);
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file())
            continue;
        const auto rel = std::filesystem::relative(entry.path(), root / "a");
        CHECK(slurp(entry.path()) == slurp(root / "b" / rel));
    }

    CHECK_THROWS_AS(generate_scenario(Shift::None, 9, 1, root / "c", 32), std::invalid_argument);
    std::ofstream(root / "file") << "x";
    CHECK_THROWS_AS(generate_scenario(Shift::None, 10, 1, root / "file" / "sub", 32), IoError);
    std::filesystem::remove_all(root);
}
