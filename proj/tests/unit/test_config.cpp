#include <doctest.h>

#include "magwell/config.hpp"
#include "magwell/errors.hpp"

using namespace magwell;

namespace {

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ParseError& e) {
        return e.line;
    }
    return 0;
}

}  // namespace

TEST_CASE("full configuration") {
    RunConfig c = parse_config(R"(
dimension = 3
potential = ["-q2/2", "q1/2", "q1*q2"]
metric = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1 + q1^2"]]
box = [1.0, 2.0, 3.0]
well_guess = [0.1, 0.0, 0.0]

[options]
rank_tol = 1e-9
resonance_cap = 12

[verify]
hbar = [0.1, 0.2]
points = 32
refine = false

[normal_form]
r1 = 7
)");
    CHECK(c.field.dim == 3);
    CHECK(!c.field.flat);
    CHECK(c.field.box == std::vector<double>{1, 2, 3});
    CHECK(c.field.options.rank_tol == 1e-9);
    CHECK(c.field.options.resonance_cap == 12);
    CHECK(c.verify.points == std::vector<int>{32, 32, 32});
    CHECK(*c.verify.refine == false);
    CHECK(!c.verify.levels);
    CHECK(*c.normal_form.r1 == 7);
    CHECK(!c.normal_form.r2);
}

TEST_CASE("defaults") {
    RunConfig c = parse_config("dimension = 2\npotential = [\"-q2\", \"0\"]\n");
    CHECK(c.field.flat);
    CHECK(c.field.box == std::vector<double>{1, 1});
    CHECK(c.field.well_guess == std::vector<double>{0, 0});
}

TEST_CASE("errors point at the offending line") {
    CHECK(error_line("dimension = 2\npotential = [\"q1\"]\n") == 2);
    CHECK(error_line("dimension = 1\npotential = [\"q1\"]\n") == 1);
    CHECK(error_line("dimension = 2\npotential = [\"q1\", \"q2\"]\ncolour = 3\n") == 3);
    CHECK(error_line("dimension = 2\npotential = [\"q1\", \"q2\"]\nmetric = [[\"1\", \"q1\"], [\"0\", \"1\"]]\n") == 3);
    CHECK(error_line("dimension = 2\npotential = [\"q1\", \"q2 +\"]\n") == 2);
    CHECK(error_line("dimension = 2\npotential = [\"q1\", \"q2\"]\n[verify]\nlevels = \"two\"\n") == 4);
    CHECK(error_line("dimension = 2\npotential = [\"q1\", \"q2\"\n") > 0);
    CHECK(error_line("potential = [\"q1\", \"q2\"]\n") == 1);
}

TEST_CASE("expression columns are absolute") {
    try {
        parse_config("dimension = 2\npotential = [\"q1\", \"q2 + q7\"]\n");
        FAIL("expected an error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 26);
    }
}
