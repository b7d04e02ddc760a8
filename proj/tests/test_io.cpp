#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracle.hpp"
#include "shallowtree/io.hpp"

using namespace shallowtree;

TEST(ParseCsv, PlainAndHeader) {
    const auto a = parse_csv("1,2\n3,4\n");
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(a.dim(), 2u);
    EXPECT_EQ(a(1, 1), 4.0);
    const auto b = parse_csv("a,b\n1,2\n");
    EXPECT_EQ(b.size(), 1u);
    EXPECT_EQ(b(0, 0), 1.0);
}

TEST(ParseCsv, CrlfBlankLinesAndSigns) {
    const auto a = parse_csv("x,y\r\n-1.5,+2e3\r\n\r\n 3 , 4 \r\n");
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(a(0, 0), -1.5);
    EXPECT_EQ(a(0, 1), 2000.0);
    EXPECT_EQ(a(1, 0), 3.0);
}

TEST(ParseCsv, ErrorsNameTheLine) {
    try {
        parse_csv("1,2\n3\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    try {
        parse_csv("a,b\n1,2\n3,x\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_csv(""), ParseError);
    EXPECT_THROW(parse_csv("a,b\n"), ParseError);
    EXPECT_THROW(parse_csv("1,nan\n"), ParseError);
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), ParseError);
}

TEST(ParseCsv, IrisMatchesAnIndependentParse) {
    const auto X = load_csv(SHALLOWTREE_IRIS_CSV);
    ASSERT_EQ(X.size(), 150u);
    ASSERT_EQ(X.dim(), 4u);
    std::ifstream in(SHALLOWTREE_IRIS_CSV);
    std::string line;
    std::getline(in, line);
    std::size_t r = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            EXPECT_EQ(X(r, c), std::stod(cell)) << r << "," << c;
            ++c;
        }
        ++r;
    }
    EXPECT_EQ(r, 150u);
}

namespace {

ThresholdTree depth_one_tree() {
    ThresholdTree t;
    const auto [l, r] = t.split(t.add_root(), Cut{1, 0.25}, 3, 1);
    t.set_leaf(l, 1, {0, 2});
    t.set_leaf(r, 0, {1});
    return t;
}

}  // namespace

TEST(Export, SingleLeaf) {
    ThresholdTree t;
    t.set_leaf(t.add_root(), 0, {0, 1});
    const auto json = tree_to_json(t);
    EXPECT_EQ(json, "{\"leaf\": {\"cluster\": 0, \"size\": 2, \"explanation\": [], \"points\": [0, 1]}}\n");
    const auto dot = tree_to_dot(t);
    EXPECT_EQ(std::count(dot.begin(), dot.end(), '['), 2);  // node attr line + one node
    EXPECT_EQ(dot.find("->"), std::string::npos);
}

TEST(Export, DepthOneTree) {
    const auto t = depth_one_tree();
    const auto dot = tree_to_dot(t);
    EXPECT_NE(dot.find("n0 -> n1 [label=\"≤\"]"), std::string::npos);
    EXPECT_NE(dot.find("n0 -> n2 [label=\">\"]"), std::string::npos);
    EXPECT_NE(dot.find("x[1] ≤ 0.25"), std::string::npos);
    const auto json = nlohmann::json::parse(tree_to_json(t));
    EXPECT_EQ(json["dim"], 1);
    EXPECT_EQ(json["theta"], 0.25);
    EXPECT_EQ(json["mistakes"], 1);
    EXPECT_EQ(json["children"][0]["leaf"]["cluster"], 1);
    EXPECT_EQ(json["children"][0]["leaf"]["explanation"][0]["op"], "<=");
    EXPECT_EQ(json["children"][1]["leaf"]["size"], 1);
    EXPECT_THROW(export_tree(t, "svg"), std::invalid_argument);
}

TEST(Export, JsonRoundTripIsByteIdentical) {
    for (std::uint64_t i = 0; i < 8; ++i) {
        const auto inst = oracle::random_instance(i);
        const auto tree = build_tree(inst.X, inst.S, Strategy::ex_shallow());
        const auto json = tree_to_json(tree);
        const auto rebuilt = tree_from_json(json);
        EXPECT_EQ(tree_to_json(rebuilt), json);
        EXPECT_EQ(tree_to_dot(rebuilt), tree_to_dot(tree));
        EXPECT_EQ(rebuilt, tree);
    }
}

TEST(Export, MalformedJsonIsAParseError) {
    EXPECT_THROW(tree_from_json("{"), ParseError);
    EXPECT_THROW(tree_from_json("{\"dim\": 0}"), ParseError);
    EXPECT_THROW(tree_from_json("{\"leaf\": {\"cluster\": 3, \"size\": 0, \"points\": []}}"),
                 ParseError);
}
