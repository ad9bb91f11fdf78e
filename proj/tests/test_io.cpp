#include <doctest.h>

#include "io.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

using namespace polar::io;

TEST_SUITE("io") {

TEST_CASE("git blob hash matches git")
{
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("numbers round trip")
{
    for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, -0.0})
        CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv layout and errors")
{
    Csv c({"a", "b"});
    c.comment("note");
    c.add(1.5).add("x");
    c.end_row();
    CHECK(c.rows() == 1);
    CHECK(c.str() == "# note\na,b\n1.5,x\n");
    c.add(1);
    CHECK_THROWS_AS(c.end_row(), std::logic_error);
    CHECK_THROWS_AS(Csv({"a"}).add("x,y"), std::invalid_argument);
}

TEST_CASE("manifest json")
{
    Manifest m;
    m.command = "family";
    m.parameters["mu"] = 0.0;
    m.outputs.emplace_back("out.csv", git_blob_hash("x"));
    const auto j = m.to_json();
    CHECK(j["command"] == "family");
    CHECK(j["tool_version"] == tool_version);
    CHECK(j["outputs"][0]["path"] == "out.csv");
    CHECK_FALSE(j.contains("diagnostic"));
}

}
