#include <doctest.h>

#include <functional>
#include <sstream>
#include <string>

#include "taskspec/demo_io.hpp"
#include "taskspec/errors.hpp"

using namespace taskspec;

namespace {

DatasetConfig tiny_config(std::size_t n) {
    DatasetConfig config;
    config.feature_count = n;
    for (std::size_t i = 0; i < n; ++i) {
        config.feature_names.push_back("f" + std::to_string(i));
    }
    FeatureSubset all;
    all.id = 0;
    for (std::size_t i = 0; i < n; ++i) {
        all.indices.push_back(static_cast<int>(i));
    }
    config.candidate_subsets.push_back(all);
    return config;
}

std::string check_throws_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("loader preserves demo and step counts") {
    std::istringstream in(
        "0,0,1.0,2.0\n0,1,1.1,2.1\n0,2,1.2,2.2\n0,3,1.3,2.3\n0,4,1.4,2.4\n"
        "1,0,5.0,6.0\n1,1,5.1,6.1\n1,2,5.2,6.2\n1,3,5.3,6.3\n1,4,5.4,6.4\n");
    const Corpus corpus = parse_demonstrations(in, tiny_config(2), "demos.txt");
    REQUIRE(corpus.demos.size() == 2);
    CHECK(corpus.demos[0].duration() == 5);
    CHECK(corpus.demos[1].duration() == 5);
    CHECK(corpus.state_count() == 10);
    CHECK(*corpus.demos[1].states[2].values[0] == doctest::Approx(5.2));
}

TEST_CASE("loader reports the offending line for wrong arity") {
    std::istringstream in("0,0,1.0,2.0\n0,1,1.0\n");
    const std::string message = check_throws_message(
        [&] { (void)parse_demonstrations(in, tiny_config(2), "demos.txt"); });
    CHECK(message.find("demos.txt:2") != std::string::npos);
}

TEST_CASE("loader rejects nan tokens") {
    std::istringstream in("0,0,nan,2.0\n");
    const std::string message = check_throws_message(
        [&] { (void)parse_demonstrations(in, tiny_config(2), "demos.txt"); });
    CHECK(message.find(":1:") != std::string::npos);
}

TEST_CASE("loader parses undef markers as undefined features") {
    std::istringstream in("0,0,undef,2.0\n");
    const Corpus corpus = parse_demonstrations(in, tiny_config(2), "demos.txt");
    CHECK_FALSE(corpus.demos[0].states[0].values[0].has_value());
    CHECK(*corpus.demos[0].states[0].values[1] == doctest::Approx(2.0));
}

TEST_CASE("loader rejects unsorted and duplicate records") {
    std::istringstream unsorted("0,1,1.0,2.0\n0,0,1.0,2.0\n");
    CHECK_THROWS_AS((void)parse_demonstrations(unsorted, tiny_config(2), "demos.txt"),
                    DataError);
    std::istringstream demo_back("1,0,1.0,2.0\n0,0,1.0,2.0\n");
    CHECK_THROWS_AS((void)parse_demonstrations(demo_back, tiny_config(2), "demos.txt"),
                    DataError);
    std::istringstream dup("0,0,1.0,2.0\n0,0,1.0,2.0\n");
    CHECK_THROWS_AS((void)parse_demonstrations(dup, tiny_config(2), "demos.txt"), DataError);
}

TEST_CASE("loader rejects empty input") {
    std::istringstream empty("");
    CHECK_THROWS_AS((void)parse_demonstrations(empty, tiny_config(2), "demos.txt"), DataError);
    std::istringstream comments_only("# nothing here\n\n");
    CHECK_THROWS_AS((void)parse_demonstrations(comments_only, tiny_config(2), "demos.txt"),
                    DataError);
}

TEST_CASE("demonstrations round-trip through the text format") {
    std::istringstream in("0,0,1.0,undef\n0,1,-2.5,0.125\n1,0,3.0,4.0\n");
    const Corpus corpus = parse_demonstrations(in, tiny_config(2), "demos.txt");

    std::ostringstream out;
    write_demonstrations(out, corpus);
    std::istringstream back(out.str());
    const Corpus again = parse_demonstrations(back, tiny_config(2), "demos.txt");

    REQUIRE(again.demos.size() == corpus.demos.size());
    for (std::size_t d = 0; d < corpus.demos.size(); ++d) {
        REQUIRE(again.demos[d].duration() == corpus.demos[d].duration());
        for (std::size_t t = 0; t < corpus.demos[d].duration(); ++t) {
            CHECK(again.demos[d].states[t].values == corpus.demos[d].states[t].values);
        }
    }
}

TEST_CASE("config parsing validates the schema") {
    {
        std::istringstream in(R"({"feature_count": 3, "candidate_subsets": [[0, 2]]})");
        const DatasetConfig config = parse_config(in, "config.json");
        CHECK(config.feature_count == 3);
        CHECK(config.feature_names.size() == 3); // defaulted
        REQUIRE(config.candidate_subsets.size() == 1);
        CHECK(config.candidate_subsets[0].indices == std::vector<int>{0, 2});
    }
    {
        std::istringstream in(R"({"feature_count": 2, "candidate_subsets": [[0, 5]]})");
        CHECK_THROWS_AS((void)parse_config(in, "config.json"), DataError);
    }
    {
        std::istringstream in(R"({"feature_count": 2, "candidate_subsets": []})");
        CHECK_THROWS_AS((void)parse_config(in, "config.json"), DataError);
    }
    {
        std::istringstream in("not json");
        CHECK_THROWS_AS((void)parse_config(in, "config.json"), DataError);
    }
}
