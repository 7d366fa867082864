#include "pipeline.hpp"
#include "support.hpp"

#include "brainalign/encoder.hpp"
#include "brainalign/io.hpp"

#include <doctest.h>

#include <json.hpp>

#include <sstream>

using namespace brainalign;
using nlohmann::json;

namespace {

struct Outcome {
    int code = 0;
    json error;
};

Outcome invoke(const std::string& command, const json& params, const testing::TempDir& root, const std::string& out)
{
    app::RunConfig cfg;
    cfg.params = params;
    cfg.base_dir = root.path();
    cfg.out = root / out;
    std::ostringstream err;
    Outcome o;
    o.code = app::run(command, cfg, err);
    if (!err.str().empty())
        o.error = json::parse(err.str())["error"];
    return o;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("encode writes a subject x layer x roi tensor")
    {
        testing::TempDir root("cli-encode");
        REQUIRE(invoke("simulate", {{"subjects", 3}, {"rois", 7}, {"layers", 2}, {"trs_per_run", 30}}, root, "sim").code ==
                0);
        REQUIRE(invoke("encode", {{"manifest", "sim/manifest.json"}}, root, "enc").code == 0);
        const auto scores = io::read_tensor(root / "enc/scores.enc");
        CHECK(scores.shape == std::vector<std::size_t>{3, 2, 7});
        const auto folds = io::read_tensor(root / "enc/scores.folds.enc");
        CHECK(folds.shape == std::vector<std::size_t>{3, 2, 7, 9});
        const auto prov = json::parse(io::read_file(root / "enc/provenance.json"));
        CHECK(prov["subcommand"] == "encode");
        CHECK(prov["artifacts"].contains("scores.csv"));
        CHECK(!prov.contains("threads"));
    }

    TEST_CASE("layer-compare of identical layers finds nothing")
    {
        testing::TempDir root("cli-lc");
        auto t = encoder::ScoreTensor::zeros("x", {"a", "b", "c", "d"}, {1, 2}, {1, 2, 3}, 5);
        for (std::size_t s = 0; s < 4; ++s)
            for (std::size_t r = 0; r < 5; ++r)
                t.score(s, 0, r) = t.score(s, 1, r) = 0.1 * static_cast<double>(s + r);
        encoder::write_score_tensor(t, root / "scores");
        REQUIRE(invoke("layer-compare", {{"scores", "scores"}}, root, "lc").code == 0);
        CHECK(io::read_file(root / "lc/layer_fractions.csv") == "layer,1,2\n1,0,0\n2,0,0\n");
    }

    TEST_CASE("errors map to exit codes and a JSON record")
    {
        testing::TempDir root("cli-err");
        auto o = invoke("simulate", {{"subjcts", 3}}, root, "a");
        CHECK(o.code == 1);
        CHECK(o.error["class"] == "config");
        CHECK(o.error["subcommand"] == "simulate");

        o = invoke("encode", {{"manifest", "missing/manifest.json"}}, root, "b");
        CHECK(o.code == 1);
        CHECK(o.error["class"] == "io");

        o = invoke("no-such-command", json::object(), root, "c");
        CHECK(o.code == 1);
        CHECK(o.error["class"] == "config");

        o = invoke("group-map", {{"scores", "x"}, {"q", 1.5}}, root, "d");
        CHECK(o.code == 1);
    }

    TEST_CASE("a locked output directory is refused")
    {
        testing::TempDir root("cli-lock");
        std::filesystem::create_directories(root / "out");
        io::write_file(root / "out/.brainalign.lock", "");
        const auto o = invoke("simulate", json::object(), root, "out");
        CHECK(o.code == 1);
        CHECK(o.error["class"] == "io");
        std::filesystem::remove(root / "out/.brainalign.lock");
        CHECK(invoke("simulate", {{"subjects", 1}, {"rois", 2}, {"trs_per_run", 20}}, root, "out").code == 0);
        CHECK(!std::filesystem::exists(root / "out/.brainalign.lock"));
    }

    TEST_CASE("every subcommand is byte-identical at 1 and 8 threads")
    {
        testing::TempDir one("cli-t1"), eight("cli-t8");
        testing::run_pipeline(one.path(), 1);
        testing::run_pipeline(eight.path(), 8);
        const auto a = testing::slurp_tree(one.path());
        const auto b = testing::slurp_tree(eight.path());
        REQUIRE(a.size() == b.size());
        for (const auto& [name, bytes] : a) {
            INFO(name);
            REQUIRE(b.count(name) == 1);
            CHECK(bytes == b.at(name));
        }
        CHECK(a.count("rp/report.md") == 1);
        std::size_t runs = 0;
        for (const auto& [name, bytes] : a)
            runs += name.ends_with("provenance.json");
        CHECK(runs == 17);
    }
}
