#include <doctest.h>

#include "cht/dataset.hpp"
#include "helpers.hpp"

#include <fstream>
#include <sstream>

using namespace cht;

namespace {

ClassedDataset parse(const std::string& text, CsvOptions options = {}) {
    std::istringstream in(text);
    return parse_csv(in, options);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("four rows, three features") {
    const auto d = parse("label,a,b,c\n1,0.5,1,2\n1,1.5,2,3\n2,0,1,-1\n2,3,4,5\n");
    CHECK(d.rows() == 4);
    CHECK(d.features() == 3);
    CHECK(d.n1 == 2);
    CHECK(d.n2 == 2);
    CHECK(d.feature_names == std::vector<std::string>{"a", "b", "c"});
    CHECK(d.x(3, 2) == 5.0);
    CHECK(d.y == std::vector<int>{1, 1, 2, 2});
}

TEST_CASE("headerless input gets V1..Vp and a movable label column") {
    CsvOptions o;
    o.has_header = false;
    o.label_column = 2;
    const auto d = parse("0.5,1,1\n1.5,2,1\n0,1,2\n3,4,2\n", o);
    CHECK(d.feature_names == std::vector<std::string>{"V1", "V2"});
    CHECK(d.x(1, 0) == 1.5);
    CHECK(d.y == std::vector<int>{1, 1, 2, 2});
}

TEST_CASE("validation errors name the problem") {
    CHECK(error_of("label,a,b\n1,0,1\n3,1,2\n2,2,3\n2,0,0\n1,5,5\n").find("invalid class label") != std::string::npos);
    CHECK(error_of("label,a,b\n1,0,1\n3,1,2\n2,2,3\n2,0,0\n1,5,5\n").find("row 2") != std::string::npos);
    CHECK(error_of("label,a,b\n1,0,1\n1,1,2\n2,2,3\n").find("class too small") != std::string::npos);
    CHECK(error_of("label,a\n1,0\n1,1\n2,2\n2,3\n").find("two features") != std::string::npos);
    CHECK(error_of("label,a,b\n1,0,\n1,1,2\n2,2,3\n2,0,0\n").find("missing value") != std::string::npos);
    CHECK(error_of("label,a,b\n1,0,NA\n1,1,2\n2,2,3\n2,0,0\n").find("missing value") != std::string::npos);
    CHECK(error_of("label,a,b\n1,0,x1\n1,1,2\n2,2,3\n2,0,0\n").find("cannot parse") != std::string::npos);
}

TEST_CASE("degeneracy reports") {
    Matrix<double> x(4, 3);
    x << 1, 0, 5, 1, 1, 6, 2, 2, 7, 3, 4, 7;
    const auto d = make_dataset(x, {1, 1, 2, 2});
    const auto reports = validate(d);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].feature == 0);
    CHECK(reports[0].class_label == 1);
    CHECK(reports[1].feature == 2);
    CHECK(reports[1].class_label == 2);
    CHECK(validate(testing::random_dataset(10, 3, 1)).empty());
}

TEST_CASE("CSV round trip is bit exact") {
    auto d = testing::random_dataset(20, 4, 7);
    d.x(0, 0) = 0.1;
    d.x(1, 1) = -1e-300;
    d.x(2, 2) = 123456789.123456789;
    std::ostringstream out;
    write_csv(out, d);
    const auto back = parse(out.str());
    CHECK(back.x == d.x);
    CHECK(back.y == d.y);
    CHECK(back.feature_names == d.feature_names);

    const std::string path = std::string(CHT_TEST_DATA_DIR) + "/roundtrip.csv";
    {
        std::ofstream f(path);
        write_csv(f, d);
    }
    CHECK(load_csv(path).x == d.x);
}

TEST_CASE("label swap and row subset") {
    const auto d = testing::random_dataset(8, 2, 3);
    const auto s = swap_labels(d);
    CHECK(s.n1 == d.n2);
    CHECK(s.y[0] == 2);
    const auto sub = subset_rows(d, {0, 1, 6, 7});
    CHECK(sub.rows() == 4);
    CHECK(sub.x.row(2) == d.x.row(6));
}
