#include <doctest.h>

#include <cmath>
#include <vector>

#include "explearn/embedding.hpp"
#include "explearn/heuristic_oracle.hpp"
#include "explearn/kernels.hpp"
#include "explearn/text.hpp"

using namespace explearn;

TEST_CASE("tokenizer folds case, plurals and stop words") {
    CHECK(text::tokenize("Import Contacts from the file") == std::vector<std::string>{"import", "contact", "file"});
    CHECK(text::tokenize("contacts.vcf") == std::vector<std::string>{"contact", "vcf"});
    CHECK(text::tokenize("").empty());
}

TEST_CASE("punctuation trimming and slots") {
    CHECK(text::trim_punctuation("  \"Alice,\" ") == "Alice");
    CHECK(text::trim_punctuation("contacts.vcf.") == "contacts.vcf");
    CHECK(text::fill_slots("Saved {name}", {{"name", "Alice"}}) == "Saved Alice");
    CHECK(text::fill_slots("{a|none} {b}", {}, {{"b", "x"}}) == "none x");
    CHECK(text::fill_slots("{missing}", {}) == "");
    CHECK(text::icontains("Import From File", "from file"));
    CHECK(text::join({"a", "b"}, ", ") == "a, b");
}

TEST_CASE("embedding conventions") {
    HashedEmbedder h;
    CHECK(h.embed("").is_zero());
    CHECK(h.embed("").dimension() == HashedEmbedder::kDimension);
    CHECK(h.embed("wifi settings") == h.embed("wifi settings"));
    CHECK(similarity(h.embed("wifi settings"), h.embed("enable wifi")) >
          similarity(h.embed("wifi settings"), h.embed("add contact")));

    const auto v = h.embed("turn on bluetooth");
    Embedding neg = v;
    for (auto& x : neg.values) {
        x = -x;
    }
    CHECK(similarity(v, v) == doctest::Approx(1.0));
    CHECK(similarity(v, neg) == doctest::Approx(-1.0));
    CHECK(similarity(h.embed(""), v) == 0.0);
    CHECK_THROWS_AS(similarity(v, Embedding{{1.0, 0.0}}), DimensionMismatch);
}

TEST_CASE("likert breakpoints are monotone and span the scale") {
    int last = 0;
    for (double s = -1.0; s <= 1.0; s += 0.01) {
        const int l = likert_from_similarity(s);
        CHECK(l >= 1);
        CHECK(l <= 7);
        CHECK(l >= last);
        last = l;
    }
    CHECK(likert_from_similarity(1.0) == 7);
    CHECK(likert_from_similarity(0.0) == 1);
}

TEST_CASE("parallel cosine kernel matches the serial reference bit for bit") {
    HashedEmbedder h;
    std::vector<Embedding> items;
    for (int i = 0; i < 1000; ++i) {
        items.push_back(h.embed("item " + std::to_string(i) + " word" + std::to_string(i % 17)));
    }
    const auto q = h.embed("item word3");
    const auto serial = kernels::cosine_scores_serial(q, items);
    for (int threads : {1, 2, 4}) {
        CHECK(kernels::cosine_scores(q, items, threads) == serial);
    }
    items.push_back(Embedding{{1.0}});
    CHECK_THROWS_AS(kernels::cosine_scores(q, items), DimensionMismatch);
}

TEST_CASE("rank_above keeps order among equal scores") {
    const std::vector<double> scores{0.5, 0.9, 0.5, 0.1, 0.9};
    const auto r = kernels::rank_above(scores, 0.2);
    REQUIRE(r.size() == 4);
    CHECK(r[0].first == 1);
    CHECK(r[1].first == 4);
    CHECK(r[2].first == 0);
    CHECK(r[3].first == 2);
    CHECK(kernels::rank_above(scores, 0.9).empty());
}

TEST_CASE("parallel_for writes every index once") {
    std::vector<int> hits(500, 0);
    kernels::parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 3);
    for (int h : hits) {
        CHECK(h == 1);
    }
}
