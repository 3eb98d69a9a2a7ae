#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "edet/csv.hpp"

using namespace edet;

namespace {

Schema tiny_schema() {
    Schema s;
    s.columns = {"a", "b", "state", "label"};
    s.label_column = "label";
    s.has_header = false;
    return s;
}

Schema wide_schema(int width) {
    Schema s;
    for (int i = 0; i < width - 1; ++i)
        s.columns.push_back("c" + std::to_string(i));
    s.columns.push_back("label");
    s.label_column = "label";
    s.has_header = false;
    return s;
}

} // namespace

TEST_CASE("schema lookups and validation") {
    Schema s = tiny_schema();
    s.validate();
    CHECK(s.width() == 4);
    CHECK(s.column_index("state") == 2);
    CHECK(s.column_index("missing") == -1);
    CHECK(s.label_index() == 3);

    Schema bad = s;
    bad.label_column = "nope";
    CHECK_THROWS_AS(bad.validate(), SpecError);

    Schema dup = s;
    dup.columns[0] = "b";
    CHECK_THROWS_AS(dup.validate(), SpecError);

    Schema empty;
    empty.label_column = "label";
    CHECK_THROWS_AS(empty.validate(), SpecError);
}

TEST_CASE("empty stream yields no records") {
    std::istringstream in("");
    CHECK(parse_records(in, tiny_schema()).empty());
}

TEST_CASE("49-column rows parse in order") {
    Schema s = wide_schema(49);
    std::ostringstream src;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 48; ++c)
            src << (r * 100 + c) << ',';
        src << (r % 2) << '\n';
    }
    std::istringstream in(src.str());
    auto recs = parse_records(in, s);
    REQUIRE(recs.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(recs[r].values.size() == 49);
        CHECK(recs[r].values[0] == std::to_string(r * 100));
        CHECK(recs[r].label == static_cast<int>(r % 2));
    }
}

TEST_CASE("wrong column count fails at that row") {
    Schema s = wide_schema(49);
    std::ostringstream src;
    for (int c = 0; c < 48; ++c)
        src << c << ',';
    src << "1\n";
    for (int c = 0; c < 47; ++c)
        src << c << ',';
    src << "0\n"; // 48 cells
    std::istringstream in(src.str());
    CsvReader reader(in, s);
    CHECK(reader.next().has_value());
    try {
        reader.next();
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
    }
}

TEST_CASE("reader survives a malformed row") {
    std::istringstream in("1,2,FIN,0\nbroken\n3,4,CON,1\n");
    Schema s = tiny_schema();
    CsvReader reader(in, s);
    CHECK(reader.next()->label == 0);
    CHECK_THROWS_AS(reader.next(), ParseError);
    auto rec = reader.next();
    REQUIRE(rec.has_value());
    CHECK(rec->label == 1);
    CHECK(rec->values[2] == "CON");
    CHECK_FALSE(reader.next().has_value());
}

TEST_CASE("header is skipped when declared") {
    Schema s = tiny_schema();
    s.has_header = true;
    std::istringstream in("a,b,state,label\n1,2,FIN,1\n");
    auto recs = parse_records(in, s);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].values[0] == "1");
}

TEST_CASE("labels outside {0,1} are malformed") {
    Schema s = tiny_schema();
    std::istringstream in("1,2,FIN,2\n");
    CsvReader reader(in, s);
    CHECK_THROWS_AS(reader.next(), ParseError);
    std::istringstream in2("1,2,FIN,\n");
    CsvReader r2(in2, s);
    CHECK_THROWS_AS(r2.next(), ParseError);
}

TEST_CASE("quoted cells may contain the delimiter") {
    std::istringstream in("\"1,5\",2,FIN,0\n");
    auto recs = parse_records(in, tiny_schema());
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].values[0] == "1,5");
}

TEST_CASE("alternate delimiter") {
    Schema s = tiny_schema();
    s.delimiter = ';';
    std::istringstream in("1;2;FIN;1\n");
    auto recs = parse_records(in, s);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].values[1] == "2");
}

TEST_CASE("write then reparse round-trips") {
    Schema s = tiny_schema();
    std::istringstream in("1,2,FIN,0\n3,4,CON,1\n");
    auto recs = parse_records(in, s);

    std::ostringstream out;
    write_records_csv(recs, s, out);
    std::istringstream back(out.str());
    auto again = parse_records(back, s);
    REQUIRE(again.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(again[i].values == recs[i].values);
        CHECK(again[i].label == recs[i].label);
    }
}
