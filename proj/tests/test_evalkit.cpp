#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "edgebin/evalkit.hpp"
#include "edgebin/graph.hpp"
#include "edgebin/rng.hpp"
#include "test_support.hpp"

using namespace edgebin;

TEST_CASE("perfect predictions give a diagonal matrix and 100% metrics") {
    std::vector<std::string> labels = {"a", "b", "c"};
    std::vector<std::string> truths = {"a", "b", "c", "a", "b"};
    ConfusionMatrix cm = confusion(truths, truths, labels);
    for (int t = 0; t < 3; ++t)
        for (int p = 0; p < 3; ++p)
            CHECK(cm.counts[static_cast<size_t>(t)][static_cast<size_t>(p)] ==
                  (t == p ? (t == 2 ? 1 : 2) : 0));
    Metrics m = metrics(cm);
    CHECK(m.top1_accuracy == 1.0);
    CHECK(m.macro_precision == 1.0);
}

TEST_CASE("a single (paper, cardboard) pair lands off-diagonal") {
    ConfusionMatrix cm = confusion({"paper"}, {"cardboard"}, bin_class_labels());
    CHECK(cm.total() == 1);
    CHECK(cm.counts[2][0] == 1);  // truth=paper (index 2), predicted=cardboard (index 0)
}

TEST_CASE("mismatched lengths and unknown labels are rejected") {
    try {
        confusion({"a", "b"}, {"a"}, {"a", "b"});
        FAIL("expected LengthMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LengthMismatch);
    }
    try {
        confusion({"a"}, {"zebra"}, {"a", "b"});
        FAIL("expected UnknownLabel");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownLabel);
    }
}

TEST_CASE("238-sample matrix with 227 diagonal hits reports 95.38% top-1") {
    // distribute 227 hits and 11 misses over 5 classes
    std::vector<std::string> labels = {"cardboard", "glass", "paper", "plastic", "metal"};
    std::vector<std::string> truths, preds;
    int hits_left = 227, total_left = 238;
    int i = 0;
    while (total_left > 0) {
        std::string t = labels[static_cast<size_t>(i % 5)];
        truths.push_back(t);
        if (hits_left > 0) {
            preds.push_back(t);
            hits_left--;
        } else {
            preds.push_back(labels[static_cast<size_t>((i + 1) % 5)]);
        }
        total_left--;
        i++;
    }
    ConfusionMatrix cm = confusion(truths, preds, labels);
    REQUIRE(cm.total() == 238);
    Metrics m = metrics(cm);
    CHECK(std::fabs(m.top1_accuracy * 100.0 - 95.38) <= 0.01);
}

TEST_CASE("hand-computed 2-class matrix metrics") {
    // [[90,10],[0,100]]: recall a = 90%, precision a = 100%
    ConfusionMatrix cm;
    cm.labels = {"a", "b"};
    cm.counts = {{90, 10}, {0, 100}};
    Metrics m = metrics(cm);
    CHECK(*m.per_class_recall[0] == doctest::Approx(0.9));
    CHECK(*m.per_class_precision[0] == doctest::Approx(1.0));
    CHECK(*m.per_class_precision[1] == doctest::Approx(100.0 / 110.0));
    CHECK(m.top1_accuracy == doctest::Approx(190.0 / 200.0));
}

TEST_CASE("1000 random pair lists: totals and row sums match a direct recount") {
    std::vector<std::string> labels = {"cardboard", "glass", "paper", "plastic", "metal",
                                       "hand",      "empty"};
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1000;
        std::vector<std::string> truths, preds;
        std::map<std::string, int64_t> truth_counts;
        for (int i = 0; i < n; ++i) {
            std::string t = labels[rng.next_below(labels.size())];
            std::string p = labels[rng.next_below(labels.size())];
            truths.push_back(t);
            preds.push_back(p);
            truth_counts[t]++;
        }
        ConfusionMatrix cm = confusion(truths, preds, labels);
        CHECK(cm.total() == n);
        for (int c = 0; c < cm.size(); ++c)
            CHECK(cm.row_total(c) == truth_counts[labels[static_cast<size_t>(c)]]);
    }
}

TEST_CASE("metrics stay in [0,1]; top1 equals the recall weighted by row totals") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        int k = 2 + static_cast<int>(rng.next_below(6));
        ConfusionMatrix cm;
        for (int i = 0; i < k; ++i) cm.labels.push_back("c" + std::to_string(i));
        cm.counts.assign(static_cast<size_t>(k), std::vector<int64_t>(static_cast<size_t>(k), 0));
        for (int t = 0; t < k; ++t)
            for (int p = 0; p < k; ++p)
                cm.counts[static_cast<size_t>(t)][static_cast<size_t>(p)] =
                    static_cast<int64_t>(rng.next_below(30));
        if (cm.total() == 0) cm.counts[0][0] = 1;

        Metrics m = metrics(cm);
        CHECK(m.top1_accuracy >= 0.0);
        CHECK(m.top1_accuracy <= 1.0);
        double weighted = 0.0;
        for (int t = 0; t < k; ++t)
            if (m.per_class_recall[static_cast<size_t>(t)])
                weighted += *m.per_class_recall[static_cast<size_t>(t)] *
                            static_cast<double>(cm.row_total(t)) /
                            static_cast<double>(cm.total());
        CHECK(std::fabs(weighted - m.top1_accuracy) <= 1e-12);
    }
}

TEST_CASE("permuting labels permutes per-class vectors and keeps aggregates") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 4;
        ConfusionMatrix cm;
        cm.labels = {"w", "x", "y", "z"};
        cm.counts.assign(k, std::vector<int64_t>(k, 0));
        for (int t = 0; t < k; ++t)
            for (int p = 0; p < k; ++p)
                cm.counts[static_cast<size_t>(t)][static_cast<size_t>(p)] =
                    static_cast<int64_t>(rng.next_below(20)) + 1;

        std::vector<int> perm = {2, 0, 3, 1};
        ConfusionMatrix pm;
        for (int i : perm) pm.labels.push_back(cm.labels[static_cast<size_t>(i)]);
        pm.counts.assign(k, std::vector<int64_t>(k, 0));
        for (int t = 0; t < k; ++t)
            for (int p = 0; p < k; ++p)
                pm.counts[static_cast<size_t>(t)][static_cast<size_t>(p)] =
                    cm.counts[static_cast<size_t>(perm[static_cast<size_t>(t)])]
                             [static_cast<size_t>(perm[static_cast<size_t>(p)])];

        Metrics base = metrics(cm);
        Metrics permuted = metrics(pm);
        CHECK(base.top1_accuracy == doctest::Approx(permuted.top1_accuracy).epsilon(1e-12));
        CHECK(base.macro_precision == doctest::Approx(permuted.macro_precision).epsilon(1e-12));
        for (int i = 0; i < k; ++i) {
            CHECK(*permuted.per_class_precision[static_cast<size_t>(i)] ==
                  doctest::Approx(*base.per_class_precision[static_cast<size_t>(perm[static_cast<size_t>(i)])]));
            CHECK(*permuted.per_class_recall[static_cast<size_t>(i)] ==
                  doctest::Approx(*base.per_class_recall[static_cast<size_t>(perm[static_cast<size_t>(i)])]));
        }
    }
}

TEST_CASE("empty prediction column is excluded from macro precision with a flag") {
    ConfusionMatrix cm;
    cm.labels = {"a", "b"};
    cm.counts = {{5, 0}, {3, 0}};  // nothing ever predicted as b
    Metrics m = metrics(cm);
    CHECK(!m.per_class_precision[1].has_value());
    CHECK(m.macro_excludes_undefined);
    CHECK(m.macro_precision == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("matrices merge cellwise") {
    ConfusionMatrix a = confusion({"a", "b"}, {"a", "a"}, {"a", "b"});
    ConfusionMatrix b = confusion({"b"}, {"b"}, {"a", "b"});
    a.merge(b);
    CHECK(a.total() == 3);
    CHECK(a.counts[1][1] == 1);
}
