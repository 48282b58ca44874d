#include "doctest.h"

#include "autofe/csv.hpp"
#include "autofe/dsl/dsl.hpp"
#include "autofe/random.hpp"
#include "generators.hpp"
#include "script_gen.hpp"

#include <cmath>
#include <functional>
#include <filesystem>

using namespace autofe;
using namespace autofe::dsl;

namespace {

const std::filesystem::path kData = AUTOFE_TEST_DATA_DIR;

const char* kRatio = R"(feature "ratio" { usefulness: "u" expr: col("calc") / col("urea") })";

Table titanic_like() {
    return Table({Column::numbers("Age", {30.0, 0.0, 37.0, 70.0}, {1, 1, 1, 0}),
                  Column::texts("Cabin", {"F/356/S", "C85", "", "B/1/P"}, {1, 1, 0, 1}),
                  Column::texts("Upper_Age", {"40", "60", "18", "90"}, {1, 1, 1, 1}),
                  Column::texts("Lower_Age", {"30", "Owned", "12", "70"}, {1, 1, 1, 1}),
                  Column::booleans("Vip", {1, 0, 0, 1}, {1, 1, 1, 1}),
                  Column::categories("Survived", {"yes", "no", "yes", "no"}, {1, 1, 1, 1})},
                 "Survived");
}

ExecError expect_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const ExecError& e) {
        return e;
    }
    FAIL("expected ExecError");
    throw std::logic_error("unreachable");
}

Table run(const std::string& src, const Table& t) {
    Table a = evaluate(parse(src), t);
    Table b = reference_evaluate(parse(src), t);
    CHECK(a == b);
    return a;
}

std::string feature(const std::string& expr) {
    return "feature \"out\" { usefulness: \"u\" expr: " + expr + " }";
}

}  // namespace

TEST_CASE("parse: ratio feature") {
    FeatureScript s = parse(kRatio);
    REQUIRE(s.statements.size() == 1);
    const auto& f = std::get<FeatureDef>(s.statements[0]);
    CHECK(f.name == "ratio");
    CHECK(f.usefulness == "u");
    CHECK(f.expr.kind == Expr::Kind::Binary);
    CHECK(f.expr.binary_op == BinaryOp::Div);
    CHECK(f.expr.args[0] == Expr::column("calc"));
}

TEST_CASE("parse: empty and comment-only programs") {
    CHECK(parse("").statements.empty());
    CHECK(parse("  # nothing here\n\n").statements.empty());
}

TEST_CASE("parse: missing expression") {
    auto e = expect_error([] { parse("feature \"x\" { expr: }"); });
    CHECK(e.kind() == ErrorKind::ParseError);
    REQUIRE(e.location());
    CHECK(e.location()->line == 1);
    CHECK(e.location()->column == 21);
    CHECK(e.describe().rfind("ParseError at line 1, column 21: ", 0) == 0);
}

TEST_CASE("parse: usefulness is required and non-empty") {
    CHECK(expect_error([] { parse("feature \"x\" { expr: 1 }"); }).kind() == ErrorKind::ParseError);
    CHECK(expect_error([] { parse("feature \"x\" { usefulness: \"  \" expr: 1 }"); }).kind() ==
          ErrorKind::ParseError);
}

TEST_CASE("parse: drop, comma, comments and precedence") {
    auto s = parse(R"(
        # leading comment
        feature "m" {
          usefulness: "moment", # trailing comma is allowed
          expr: 1 + 2 * 3 < 10 and not false or true
        }
        drop "left-weight" reason "folded into m"
        drop "x"
    )");
    REQUIRE(s.statements.size() == 3);
    const auto& e = std::get<FeatureDef>(s.statements[0]).expr;
    CHECK(e.binary_op == BinaryOp::Or);
    CHECK(e.args[0].binary_op == BinaryOp::And);
    CHECK(e.args[0].args[0].binary_op == BinaryOp::Lt);
    CHECK(e.args[0].args[0].args[0].args[1].binary_op == BinaryOp::Mul);
    CHECK(std::get<DropColumn>(s.statements[1]).reason == "folded into m");
    CHECK(std::get<DropColumn>(s.statements[2]).reason.empty());
}

TEST_CASE("parse: error messages") {
    auto eq = expect_error([] { parse(feature("col(\"a\") = 1")); });
    CHECK(eq.kind() == ErrorKind::ParseError);
    CHECK(eq.message().find("==") != std::string::npos);
    auto bang = expect_error([] { parse(feature("!true")); });
    CHECK(bang.message().find("not") != std::string::npos);
    CHECK(expect_error([] { parse(feature("1 < 2 < 3")); }).kind() == ErrorKind::ParseError);
    CHECK(expect_error([] { parse(feature("\"unterminated")); }).kind() == ErrorKind::ParseError);
    CHECK(expect_error([] { parse("import os"); }).kind() == ErrorKind::ParseError);
    Schema schema{{{"y", Dtype::Category}}, "y"};
    CHECK(expect_error([&] { validate(parse(feature("[1, 2]")), schema); }).kind() == ErrorKind::TypeError);
}

TEST_CASE("validate: ratio types as Number") {
    Schema schema{{{"calc", Dtype::Number}, {"urea", Dtype::Number}, {"target", Dtype::Category}}, "target"};
    FeatureScript typed = validate(parse(kRatio), schema);
    CHECK(*std::get<FeatureDef>(typed.statements[0]).expr.type == Dtype::Number);
}

TEST_CASE("validate: Text divided by number") {
    Schema schema{{{"Cabin", Dtype::Text}, {"y", Dtype::Category}}, "y"};
    auto e = expect_error([&] { validate(parse(feature("col(\"Cabin\") / 2")), schema); });
    CHECK(e.kind() == ErrorKind::TypeError);
    CHECK(e.message() == "operator '/' cannot be applied to text and number");
}

TEST_CASE("validate: features are visible later, drops hide columns") {
    Schema schema{{{"left-weight", Dtype::Number},
                   {"left-distance", Dtype::Number},
                   {"Class", Dtype::Category}},
                  "Class"};
    const char* src = R"(
        feature "left_moment" { usefulness: "u" expr: col("left-weight") * col("left-distance") }
        drop "left-weight"
        feature "twice" { usefulness: "u" expr: col("left_moment") * 2 }
    )";
    Schema out = result_schema(parse(src), schema);
    CHECK_FALSE(out.find("left-weight"));
    CHECK(out.find("left_moment") == Dtype::Number);
    CHECK(out.find("twice") == Dtype::Number);

    std::string bad = std::string(src) + "\nfeature \"again\" { usefulness: \"u\" expr: col(\"left-weight\") }";
    auto e = expect_error([&] { validate(parse(bad), schema); });
    CHECK(e.kind() == ErrorKind::UnknownColumn);
    CHECK(e.message() == "unknown column \"left-weight\"");
}

TEST_CASE("validate: error kinds") {
    Schema schema{{{"a", Dtype::Number}, {"s", Dtype::Text}, {"b", Dtype::Boolean}, {"y", Dtype::Category}}, "y"};
    auto kind = [&](const std::string& src) {
        return expect_error([&] { validate(parse(src), schema); }).kind();
    };
    CHECK(kind(feature("col(\"zzz\")")) == ErrorKind::UnknownColumn);
    CHECK(kind(feature("col(\"y\")")) == ErrorKind::UnknownColumn);
    CHECK(kind(feature("col(\"b\") + 1")) == ErrorKind::TypeError);
    CHECK(kind(feature("system(\"rm\")")) == ErrorKind::TypeError);
    CHECK(kind(feature("abs(1, 2)")) == ErrorKind::ArityError);
    CHECK(kind(feature("bin(col(\"a\"), [0, 1, 2], [\"lo\"])")) == ErrorKind::ArityError);
    CHECK(kind(feature("str_split(col(\"s\"), col(\"s\"), 0)")) == ErrorKind::TypeError);
    CHECK(kind(feature("fill_missing(col(\"a\"), \"zero\")")) == ErrorKind::TypeError);
    CHECK(kind(feature("if_else(col(\"b\"), 1, \"x\")")) == ErrorKind::TypeError);
    CHECK(kind("feature \"a\" { usefulness: \"u\" expr: 1 }") == ErrorKind::DuplicateFeature);
    CHECK(kind(feature("1") + feature("2")) == ErrorKind::DuplicateFeature);
    CHECK(kind("drop \"y\"") == ErrorKind::TypeError);
    CHECK(kind("drop \"nope\"") == ErrorKind::UnknownColumn);
}

TEST_CASE("unknown function lists the whitelist") {
    Schema schema{{{"a", Dtype::Number}, {"y", Dtype::Category}}, "y"};
    auto e = expect_error([&] { validate(parse(feature("exec(\"x\")")), schema); });
    for (const auto& b : builtin_functions()) CHECK(e.message().find(b.name) != std::string::npos);
    CHECK(builtin_functions().size() == 16);
}

TEST_CASE("evaluate: ratio on the kidney-stone rows") {
    Table t = load_csv(kData / "kidney_stone.csv", "target");
    Table out = run(std::string(kRatio), t);
    const Column& r = out.column("ratio");
    CHECK(r.dtype() == Dtype::Number);
    CHECK(r.number(0) == doctest::Approx(1.16 / 126.0).epsilon(1e-15));
    CHECK(r.number(0) == doctest::Approx(0.0092063).epsilon(1e-5));
    CHECK(out.column_count() == t.column_count() + 1);
}

TEST_CASE("evaluate: bin uses left-open intervals") {
    Table out = run(feature(R"(bin(col("Age"), [0,12,18,35,60,100], ["Child","Teen","YoungAdult","Adult","Senior"]))"),
                    titanic_like());
    const Column& c = out.column("out");
    CHECK(c.dtype() == Dtype::Category);
    CHECK(c.string_value(0) == "YoungAdult");
    CHECK_FALSE(c.valid(1));
    CHECK(c.string_value(2) == "Adult");
    CHECK_FALSE(c.valid(3));
}

TEST_CASE("evaluate: string indexing") {
    Table t = titanic_like();
    Table a = run(feature(R"(str_char(col("Cabin"), 0))"), t);
    CHECK(a.column("out").string_value(0) == "F");
    CHECK(a.column("out").string_value(1) == "C");
    CHECK_FALSE(a.column("out").valid(2));

    Table b = run(feature(R"(str_split(col("Cabin"), "/", -1))"), t);
    CHECK(b.column("out").string_value(0) == "S");
    CHECK(b.column("out").string_value(1) == "C85");
    CHECK(b.column("out").string_value(3) == "P");

    Table c = run(feature(R"(str_split(col("Cabin"), "/", 1))"), t);
    CHECK(c.column("out").string_value(0) == "356");
    CHECK_FALSE(c.column("out").valid(1));

    Table d = run(feature(R"(str_extract_int(col("Cabin")))"), t);
    CHECK(d.column("out").number(0) == 356.0);
    CHECK(d.column("out").number(1) == 85.0);
}

TEST_CASE("evaluate: strict integer conversion on a missing value") {
    const std::string src =
        feature(R"(as_int(str_extract_int(col("Upper_Age")) - str_extract_int(col("Lower_Age"))))");
    Table t = titanic_like();
    auto e1 = expect_error([&] { evaluate(parse(src), t); });
    auto e2 = expect_error([&] { reference_evaluate(parse(src), t); });
    CHECK(e1.kind() == ErrorKind::RuntimeError);
    CHECK(e1.message() == "cannot convert missing value to integer");
    CHECK(e1.describe() == e2.describe());
    CHECK(e1.describe() == "RuntimeError at line 1, column 39: cannot convert missing value to integer");

    const std::string fixed = feature(
        R"(as_int(fill_missing(str_extract_int(col("Upper_Age")) - str_extract_int(col("Lower_Age")), 0)))");
    Table out = run(fixed, t);
    CHECK(out.column("out").number(0) == 10.0);
    CHECK(out.column("out").number(1) == 0.0);
}

TEST_CASE("evaluate: missing propagation and special functions") {
    Table t = titanic_like();
    Table a = run(feature(R"(col("Age") + 1)"), t);
    CHECK_FALSE(a.column("out").valid(3));
    Table b = run(feature(R"(is_missing(col("Age")))"), t);
    CHECK(b.column("out").valid(3));
    CHECK(b.column("out").boolean(3));
    Table c = run(feature(R"(fill_missing(col("Age"), -1))"), t);
    CHECK(c.column("out").number(3) == -1.0);
    Table d = run(feature(R"(if_else(col("Vip"), "vip", col("Cabin")))"), t);
    CHECK(d.column("out").dtype() == Dtype::Text);
    CHECK(d.column("out").string_value(0) == "vip");
    Table d2 = run(feature(R"(if_else(col("Vip"), "vip", as_category(col("Cabin"))))"), t);
    CHECK(d2.column("out").dtype() == Dtype::Category);
    CHECK_FALSE(d.column("out").valid(2));
    Table e = run(feature(R"(col("Age") / (col("Age") - col("Age")))"), t);
    for (std::size_t r = 0; r < 4; ++r) CHECK_FALSE(e.column("out").valid(r));
    Table f = run(feature(R"(log(col("Age")))"), t);
    CHECK_FALSE(f.column("out").valid(1));
    Table g = run(feature(R"(as_number(col("Vip")) + as_number(col("Upper_Age")))"), t);
    CHECK(g.column("out").number(0) == 41.0);
    Table h = run(feature("1e300 * 1e300"), t);
    CHECK_FALSE(h.column("out").valid(0));
    Table i = run(feature(R"(as_int(-2.7) + as_int(2.7))"), t);
    CHECK(i.column("out").number(0) == 0.0);
}

TEST_CASE("evaluate: category equality against a label") {
    Table tt({Column::categories("top-left-square", {"x", "o", "b"}, {1, 1, 1}, {"x", "o", "b"}),
              Column::categories("Class", {"positive", "negative", "negative"}, {1, 1, 1})},
             "Class");
    Table out = run(feature(R"(as_number(col("top-left-square") == "x"))"), tt);
    CHECK(out.column("out").number(0) == 1.0);
    CHECK(out.column("out").number(1) == 0.0);
}

TEST_CASE("evaluate: input table is unchanged and errors leave nothing behind") {
    Table t = titanic_like();
    const auto before = t.content_hash();
    Table copy = t;
    run(feature(R"(col("Age") * 2)") + "\ndrop \"Cabin\"", t);
    CHECK(t == copy);
    CHECK(t.content_hash() == before);
    CHECK_THROWS_AS(evaluate(parse(feature(R"(as_int(col("Age")))")), t), ExecError);
    CHECK(t.content_hash() == before);
}

TEST_CASE("pretty_print round trip") {
    CHECK(pretty_print(parse("")).empty());
    FeatureScript ratio = parse(kRatio);
    CHECK(parse(pretty_print(ratio)) == ratio);
    CHECK(pretty_print(ratio) ==
          "feature \"ratio\" {\n  usefulness: \"u\"\n  expr: col(\"calc\") / col(\"urea\")\n}\n");

    FeatureScript commented = parse("# c1\nfeature \"a\" { usefulness: \"x\" expr: 1 } # c2\ndrop \"b\"\n");
    const std::string text = pretty_print(commented);
    CHECK(text.find('#') == std::string::npos);
    CHECK(parse(text) == commented);

    for (const char* src : {"(1 - 2) - 3", "1 - (2 - 3)", "-(-3)", "- -3", "-(1 + 2) * 3", "not (true and false)",
                            "(1 < 2) == true", "\"a\\\"b\\\\c\"", "-0.0", "--1"}) {
        FeatureScript s = parse(feature(src));
        CHECK_MESSAGE(parse(pretty_print(s)) == s, src);
    }
}

TEST_CASE("input_columns ignores columns defined in the script") {
    auto s = parse(R"(
        feature "a2" { usefulness: "u" expr: col("a") * 2 }
        feature "b2" { usefulness: "u" expr: col("a2") + col("b") }
    )");
    CHECK(input_columns(s) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("fuzz: evaluate matches reference_evaluate") {
    Rng rng(0xFEED5EED);
    int errors = 0;
    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Table table = testing::random_table(rng, 1 + rng.index(200), 2 + rng.index(6));
        testing::ScriptGenerator gen(rng, table.schema());
        FeatureScript script = gen.script();
        const std::string text = pretty_print(script);
        FeatureScript reparsed = parse(text);
        REQUIRE_MESSAGE(reparsed == script, text);

        std::optional<Table> a, b;
        std::optional<ExecError> ea, eb;
        try {
            a = evaluate(reparsed, table);
        } catch (const ExecError& e) {
            ea = e;
        }
        try {
            b = reference_evaluate(reparsed, table);
        } catch (const ExecError& e) {
            eb = e;
        }
        REQUIRE_MESSAGE(a.has_value() == b.has_value(), text);
        if (a) {
            CHECK_MESSAGE(*a == *b, text);
            ++ok;
        } else {
            CHECK_MESSAGE(ea->describe() == eb->describe(), text);
            ++errors;
        }
    }
    // The generator must exercise both paths.
    CHECK(errors > 10);
    CHECK(ok > 500);
}
