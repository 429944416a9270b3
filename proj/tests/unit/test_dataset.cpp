#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "fieldlens/dataset.hpp"
#include "fieldlens/digest.hpp"
#include "random_sets.hpp"
#include "split_oracle.hpp"

using namespace fieldlens;
using namespace fieldlens::dataset;
using domain::AnnotationSet;

namespace {

AnnotationSet flat_set(std::size_t n, std::size_t classes = 1) {
    AnnotationSet set;
    for (std::size_t c = 0; c < classes; ++c) set.label_map.classes.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        std::string id = "img" + std::to_string(i) + ".jpg";
        set.images.push_back({id, 100, 100});
        set.boxes[id].push_back({1, 1, 50, 50, i % classes});
    }
    return set;
}

}  // namespace

TEST(FramePlan, OneFramePerSecond) {
    auto plan = plan_frame_extraction(10, 30, 1);
    ASSERT_TRUE(plan.ok());
    ASSERT_EQ(plan->timestamps_s.size(), 10u);
    for (int k = 0; k < 10; ++k) EXPECT_DOUBLE_EQ(plan->timestamps_s[k], k);
    EXPECT_TRUE(plan->warnings.empty());
}

TEST(FramePlan, RateClampedToVideo) {
    auto plan = plan_frame_extraction(2, 30, 60, "clip.mp4");
    ASSERT_TRUE(plan.ok());
    EXPECT_EQ(plan->effective_rate_fps, 30);
    ASSERT_EQ(plan->warnings.size(), 1u);
    EXPECT_EQ(plan->warnings[0].code, ErrorCode::RateClamped);
    EXPECT_EQ(plan->timestamps_s.size(), 60u);
}

TEST(FramePlan, InvalidInputs) {
    EXPECT_EQ(plan_frame_extraction(10, 30, 0).error().code, ErrorCode::InvalidRate);
    EXPECT_EQ(plan_frame_extraction(10, -1, 1).error().code, ErrorCode::InvalidRate);
    EXPECT_EQ(plan_frame_extraction(0, 30, 1).error().code, ErrorCode::InvalidRate);
    EXPECT_EQ(plan_frame_extraction(10, 30, NAN).error().code, ErrorCode::InvalidRate);
}

TEST(FramePlan, TimestampsIncreaseWithinDuration) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        double d = testkit::uniform(rng, 0.01, 120);
        double fps = testkit::uniform(rng, 1, 60);
        double rate = testkit::uniform(rng, 0.05, 90);
        auto plan = plan_frame_extraction(d, fps, rate);
        ASSERT_TRUE(plan.ok());
        ASSERT_FALSE(plan->timestamps_s.empty());
        EXPECT_EQ(plan->timestamps_s.front(), 0);
        for (std::size_t k = 1; k < plan->timestamps_s.size(); ++k)
            EXPECT_LT(plan->timestamps_s[k - 1], plan->timestamps_s[k]);
        EXPECT_LT(plan->timestamps_s.back(), d);
        EXPECT_GE(plan->timestamps_s.back() + 1 / plan->effective_rate_fps, d - 1e-9);
    }
}

TEST(SplitRatio, ParseAndValidate) {
    auto r = SplitRatio::parse("6:2:2");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->train, 6);
    EXPECT_EQ(r->to_string(), "6:2:2");
    EXPECT_TRUE(SplitRatio::parse("0.7:0.15:0.15").ok());
    EXPECT_EQ(SplitRatio::parse("6:2").error().code, ErrorCode::InvalidRatio);
    EXPECT_EQ(SplitRatio::parse("6:0:2").error().code, ErrorCode::InvalidRatio);
    EXPECT_EQ(SplitRatio::parse("6:x:2").error().code, ErrorCode::InvalidRatio);
}

TEST(Apportion, MatchesIntegerOracle) {
    for (unsigned a = 1; a <= 7; ++a)
        for (unsigned b = 1; b <= 7; ++b)
            for (unsigned c = 1; c <= 7; ++c) {
                SplitRatio r{double(a), double(b), double(c)};
                for (std::size_t n = 0; n <= 60; ++n)
                    ASSERT_EQ(apportion(n, r.proportions()), testkit::oracle_apportion(n, {a, b, c}))
                        << n << " over " << r.to_string();
            }
}

TEST(Split, TenImagesDefaultRatio) {
    auto s = split_dataset(flat_set(10), {}, 42);
    ASSERT_TRUE(s.ok());
    EXPECT_EQ(s->train.size(), 6u);
    EXPECT_EQ(s->test.size(), 2u);
    EXPECT_EQ(s->eval.size(), 2u);
}

TEST(Split, ElevenImagesLeftoverToTrain) {
    auto s = split_dataset(flat_set(11), {}, 42);
    ASSERT_TRUE(s.ok());
    EXPECT_EQ(s->train.size(), 7u);
    EXPECT_EQ(s->test.size(), 2u);
    EXPECT_EQ(s->eval.size(), 2u);
}

TEST(Split, GlobalSizesHoldAcrossUnevenStrata) {
    // strata of 3 and 7 apportioned independently would give 6/3/1
    auto set = flat_set(10, 2);
    for (std::size_t i = 0; i < 10; ++i) set.boxes["img" + std::to_string(i) + ".jpg"][0].class_id = i < 3 ? 0 : 1;
    auto s = split_dataset(set, {}, 1);
    ASSERT_TRUE(s.ok());
    EXPECT_EQ(s->train.size(), 6u);
    EXPECT_EQ(s->test.size(), 2u);
    EXPECT_EQ(s->eval.size(), 2u);
    std::string why;
    EXPECT_TRUE(testkit::split_properties_hold(set, {6, 2, 2}, *s, &why)) << why;
}

TEST(Split, Deterministic) {
    std::mt19937_64 rng(9);
    auto set = testkit::random_detection_set(rng, {.min_images = 30, .max_images = 40});
    auto a = split_dataset(set, {}, 7);
    auto b = split_dataset(set, {}, 7);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(a->train, b->train);
    EXPECT_EQ(a->test, b->test);
    EXPECT_EQ(a->eval, b->eval);
    EXPECT_EQ(split_sidecar_json(*a), split_sidecar_json(*b));
}

TEST(Split, InputOrderDoesNotMatter) {
    std::mt19937_64 rng(10);
    auto set = testkit::random_detection_set(rng, {.min_images = 20, .max_images = 30});
    auto reversed = set;
    std::reverse(reversed.images.begin(), reversed.images.end());
    auto a = split_dataset(set, {}, 3);
    auto b = split_dataset(reversed, {}, 3);
    EXPECT_EQ(a->train, b->train);
    EXPECT_EQ(a->eval, b->eval);
}

TEST(Split, EmptyDataset) {
    EXPECT_EQ(split_dataset(AnnotationSet{}, {}, 1).error().code, ErrorCode::EmptyDataset);
}

TEST(Split, UnlabeledImagesFormTheirOwnStratum) {
    auto set = flat_set(5);
    for (int i = 0; i < 5; ++i) set.images.push_back({"u" + std::to_string(i), 10, 10});
    auto s = split_dataset(set, {}, 2);
    ASSERT_TRUE(s.ok());
    ASSERT_EQ(s->strata.size(), 2u);
    EXPECT_EQ(s->strata[0].class_id, 0u);
    EXPECT_FALSE(s->strata[1].class_id);
    EXPECT_EQ(s->strata[1].counts[0] + s->strata[1].counts[1] + s->strata[1].counts[2], 5u);
}

TEST(SplitProperty, RandomSetsAndRatios) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        bool cls = trial % 4 == 3;
        testkit::SetShape shape{.min_images = 1, .max_images = 80, .max_classes = 6};
        auto set = cls ? testkit::random_classification_set(rng, shape) : testkit::random_detection_set(rng, shape);
        std::array<unsigned, 3> w{unsigned(testkit::uniform_index(rng, 1, 9)), unsigned(testkit::uniform_index(rng, 1, 9)),
                                  unsigned(testkit::uniform_index(rng, 1, 9))};
        SplitRatio ratio{double(w[0]), double(w[1]), double(w[2])};
        std::optional<std::array<std::size_t, 3>> sizes;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto s = split_dataset(set, ratio, seed);
            ASSERT_TRUE(s.ok());
            std::string why;
            ASSERT_TRUE(testkit::split_properties_hold(set, w, *s, &why)) << why << " (trial " << trial << ")";
            std::array<std::size_t, 3> now{s->train.size(), s->test.size(), s->eval.size()};
            if (sizes) {
                EXPECT_EQ(*sizes, now);
            }
            sizes = now;
        }
    }
}

TEST(SplitProperty, SeedsPermuteMembership) {
    auto set = flat_set(50, 3);
    auto a = split_dataset(set, {}, 1);
    bool differs = false;
    for (std::uint64_t seed = 2; seed < 6 && !differs; ++seed) differs = split_dataset(set, {}, seed)->train != a->train;
    EXPECT_TRUE(differs);
}

TEST(SplitManifests, WriteAndReadBack) {
    auto dir = std::filesystem::temp_directory_path() / ("fl_split_" + random_hex(4));
    auto set = flat_set(12, 2);
    auto s = split_dataset(set, {7, 2, 1}, 99);
    ASSERT_TRUE(s.ok());
    ASSERT_TRUE(write_split_manifests(*s, dir).ok());
    for (auto f : {"train.txt", "test.txt", "eval.txt", "split.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
    auto back = read_split_manifests(dir);
    ASSERT_TRUE(back.ok()) << back.error().describe();
    EXPECT_EQ(back->train, s->train);
    EXPECT_EQ(back->test, s->test);
    EXPECT_EQ(back->eval, s->eval);
    EXPECT_EQ(back->seed, 99u);
    EXPECT_EQ(split_sidecar_json(*back), split_sidecar_json(*s));
    std::filesystem::remove_all(dir);
    EXPECT_EQ(read_split_manifests(dir).error().code, ErrorCode::MissingSplit);
}

TEST(Stats, CountsBoxesAndImages) {
    AnnotationSet set;
    set.label_map.classes = {"rip"};
    for (auto id : {"a", "b"}) {
        set.images.push_back({id, 100, 100});
        for (int k = 0; k < 3; ++k) set.boxes[id].push_back({1, 1, 9, 9, 0});
    }
    auto st = dataset_stats(set);
    EXPECT_EQ(st.per_class_box_count.at(0), 6u);
    EXPECT_EQ(st.per_class_image_count.at(0), 2u);
    EXPECT_EQ(st.total_images, 2u);
    EXPECT_EQ(st.unlabeled_images, 0u);
}

TEST(Stats, EmptySet) {
    auto st = dataset_stats(AnnotationSet{});
    EXPECT_EQ(st.total_images, 0u);
    EXPECT_EQ(st.unlabeled_images, 0u);
    EXPECT_TRUE(st.per_class_image_count.empty());
}

TEST(Stats, UnlabeledImage) {
    auto set = flat_set(1);
    set.images.push_back({"bare", 10, 10});
    auto st = dataset_stats(set);
    EXPECT_EQ(st.unlabeled_images, 1u);
    EXPECT_EQ(st.total_images, 2u);
}

TEST(Stats, SingleLabelTotalsAddUp) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        auto set = testkit::random_classification_set(rng);
        auto st = dataset_stats(set);
        std::size_t sum = st.unlabeled_images;
        for (auto [c, n] : st.per_class_image_count) sum += n;
        EXPECT_EQ(sum, st.total_images);
    }
}

TEST(Advisor, Tiers) {
    EXPECT_EQ(tier_for(120), Tier::insufficient);
    EXPECT_EQ(tier_for(150), Tier::marginal);
    EXPECT_EQ(tier_for(2500), Tier::optimal);
    const std::pair<std::size_t, Tier> edges[] = {{149, Tier::insufficient}, {150, Tier::marginal}, {499, Tier::marginal},
                                                  {500, Tier::good},         {1999, Tier::good},    {2000, Tier::optimal}};
    for (auto [n, t] : edges) EXPECT_EQ(tier_for(n), t) << n;
}

TEST(Advisor, Monotone) {
    for (std::size_t n = 0; n < 3000; ++n) EXPECT_LE(int(tier_for(n)), int(tier_for(n + 1)));
}

TEST(Advisor, ReportUsesClassNames) {
    DatasetStats st;
    st.per_class_image_count = {{0, 120}, {1, 2500}};
    st.unlabeled_images = 3;
    domain::LabelMap names{{"rip", "wave"}};
    auto rep = advise_sufficiency(st, &names);
    EXPECT_EQ(rep.per_class_tier.at(0), Tier::insufficient);
    EXPECT_EQ(rep.per_class_tier.at(1), Tier::optimal);
    ASSERT_EQ(rep.notes.size(), 3u);
    EXPECT_EQ(rep.notes[0], "rip: 120 images, insufficient (30 more to reach marginal)");
}
