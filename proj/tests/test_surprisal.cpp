#include "support.hpp"

#include "brainalign/surprisal.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace brainalign;
using namespace brainalign::surprisal;

namespace {

// Two runs; word 1 is split into two sub-tokens.
TokenTable small_table()
{
    TokenTable t;
    t.surprisal.resize(5, 2);
    t.surprisal << 1.0, 2.0, 0.5, 0.25, 0.5, 0.75, 3.0, 1.0, 2.0, 2.0;
    t.alignment = {{0, 0, 1, 0, 0}, {1, 1, 1, 0, 1}, {2, 1, 1, 0, 1}, {3, 2, 2, 1, 0}, {4, 3, 2, 1, 1}};
    return t;
}

} // namespace

TEST_SUITE("surprisal")
{
    TEST_CASE("sub-token surprisal sums into words")
    {
        const auto words = aggregate_word_surprisal(small_table());
        REQUIRE(words.values.rows() == 4);
        CHECK(words.values(1, 0) == 1.0);
        CHECK(words.values(1, 1) == 1.0);
        CHECK(words.run_ids == std::vector<int>{1, 1, 2, 2});
        const Vector means = layer_mean_surprisal(words);
        CHECK(means(0) == doctest::Approx(7.0 / 4.0));
        CHECK(means(1) == doctest::Approx(6.0 / 4.0));
    }

    TEST_CASE("words without tokens and empty tables are errors")
    {
        TokenTable t = small_table();
        t.alignment[3].word_index = 3; // word 2 loses its only token
        CHECK_THROWS_AS(aggregate_word_surprisal(t), std::invalid_argument);
        CHECK_THROWS_AS(layer_mean_surprisal(SurprisalTable{}), std::invalid_argument);
        TokenTable negative = small_table();
        negative.surprisal(0, 0) = -0.1;
        CHECK_THROWS_AS(negative.validate(), ConfigError);
    }

    TEST_CASE("token table file round trip")
    {
        testing::TempDir dir("tokens");
        const TokenTable t = small_table();
        write_token_table(t, dir / "s.enc", dir / "a.jsonl");
        const TokenTable back = read_token_table(dir / "s.enc", dir / "a.jsonl");
        CHECK(back.surprisal == t.surprisal);
        REQUIRE(back.alignment.size() == t.alignment.size());
        CHECK(back.alignment[2].word_index == 1);
        CHECK(back.alignment[4].run_id == 2);
    }

    TEST_CASE("convergence across runs shared by every language")
    {
        SurprisalTable a, b, c;
        a.values.resize(4, 1);
        a.values << 1, 2, 3, 5;
        a.run_ids = {1, 2, 3, 4};
        b.values.resize(3, 1);
        b.values << 2, 4, 6;
        b.run_ids = {1, 2, 3};
        c.values.resize(3, 1);
        c.values << 3, 2, 1;
        c.run_ids = {1, 2, 3};
        const std::vector<SurprisalTable> tables{a, b, c};
        const auto conv = surprisal_convergence(tables);
        CHECK(conv.shared_runs == std::vector<int>{1, 2, 3});
        CHECK(conv.correlation.pairwise(0, 0) == doctest::Approx(1.0));
        CHECK(conv.correlation.pairwise(0, 1) == doctest::Approx(-1.0));
        CHECK(conv.correlation.mean_abs(0) == doctest::Approx(1.0));
        CHECK(conv.correlation.abs_mean(0) == doctest::Approx(1.0 / 3.0));

        SurprisalTable lonely;
        lonely.values = Matrix::Ones(2, 1);
        lonely.run_ids = {1, 9};
        const std::vector<SurprisalTable> disjoint{a, lonely};
        CHECK_THROWS_AS(surprisal_convergence(disjoint), std::invalid_argument);
    }
}
