#include <gtest/gtest.h>

#include <mmasim/config.hpp>

#include <filesystem>

using namespace mmasim;

namespace {

std::string const kMinimal = R"({
  "dimension": 1,
  "alpha": 1.5,
  "quadruple": {
    "gamma": [0],
    "levy_measure": {"type": "pareto", "alpha": 1.5, "c": 1, "r_min": 1},
    "mixing_measure": {"type": "discrete", "atoms": [{"A": [-1], "p": 1}]}
  },
  "kernel": {"name": "supou"},
  "grid": {"step": 0.25}
})";

std::string with(std::string const& from, std::string const& to)
{
    std::string s = kMinimal;
    auto const at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
}

//! Line reported by the ConfigError thrown for text, or -1 when it parses.
int error_line(std::string const& text, std::string* what = nullptr)
{
    try
    {
        parse_config(text);
    }
    catch (ConfigError const& e)
    {
        if (what)
            *what = e.what();
        return e.line();
    }
    return -1;
}

}  // namespace

TEST(Config, EveryShippedConfigParsesExceptTheMalformedOne)
{
    int n = 0;
    for (auto const& e : std::filesystem::directory_iterator(MMASIM_CONFIG_DIR))
    {
        if (e.path().extension() != ".json")
            continue;
        ++n;
        auto const name = e.path().filename().string();
        if (name == "malformed_missing_alpha.json")
            EXPECT_THROW(load_config(e.path().string()), ConfigError);
        else if (name == "overlapping_shells.json")
        {
            try
            {
                load_config(e.path().string());
                ADD_FAILURE() << "overlapping shells accepted";
            }
            catch (ConfigError const& err)
            {
                EXPECT_NE(std::string(err.what()).find("shells overlap"), std::string::npos);
            }
        }
        else
            EXPECT_NO_THROW(load_config(e.path().string())) << name;
    }
    EXPECT_GE(n, 8);
}

TEST(Config, DefaultsAndGrid)
{
    auto const c = parse_config(kMinimal);
    EXPECT_EQ(c.dimension, 1);
    EXPECT_EQ(c.grid, (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
    EXPECT_EQ(c.kernel.family, KernelFamily::supou);
    EXPECT_EQ(c.format, PathFormat::csv);
    EXPECT_GT(c.n_paths, 0u);
}

TEST(Config, ErrorsNameFieldAndLine)
{
    std::string what;
    EXPECT_EQ(error_line(with("\"alpha\": 1.5,\n  \"quadruple\"", "\"quadruple\""), &what), 1);
    EXPECT_NE(what.find("/alpha"), std::string::npos) << what;
    EXPECT_NE(what.find("missing required field"), std::string::npos) << what;

    EXPECT_EQ(error_line(with("\"kernel\": {\"name\": \"supou\"}", "\"kernel\": {\"name\": \"supou\", \"bogus\": 1}"), &what),
              9);
    EXPECT_NE(what.find("bogus"), std::string::npos) << what;

    EXPECT_EQ(error_line(with("\"c\": 1", "\"c\": -1")), 6);
    EXPECT_GT(error_line(with("\"A\": [-1]", "\"A\": [1]")), 0);  // not stable
    EXPECT_GT(error_line(with("\"alpha\": 1.5,\n", "\"alpha\": 1.2,\n")), 0);
    EXPECT_EQ(error_line(with("\"grid\": {\"step\": 0.25}", "\"grid\": {\"step\": 0.25,}")), 10);
}

TEST(Config, ChecksumIgnoresThreadsAndCoversSeed)
{
    auto const a = parse_config(kMinimal);
    auto const b = parse_config(with("\"grid\": {\"step\": 0.25}", "\"grid\": {\"step\": 0.25},\n  \"ensemble\": {\"threads\": 8}"));
    auto const c = parse_config(with("\"grid\": {\"step\": 0.25}", "\"grid\": {\"step\": 0.25},\n  \"ensemble\": {\"seed\": 99}"));
    EXPECT_EQ(a.checksum, b.checksum);
    EXPECT_EQ(b.threads, 8u);
    EXPECT_NE(a.checksum, c.checksum);

    auto d = a;
    override_seed(d, 99);
    EXPECT_EQ(d.seed, 99u);
    EXPECT_EQ(d.checksum, c.checksum);
}

TEST(Config, ZeroPathsIsAccepted)
{
    auto const c =
        parse_config(with("\"grid\": {\"step\": 0.25}", "\"grid\": {\"step\": 0.25},\n  \"ensemble\": {\"n_paths\": 0}"));
    EXPECT_EQ(c.n_paths, 0u);
}
