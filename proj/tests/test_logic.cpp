#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eso/logic.hpp"

using namespace eso;

static const char* kDagText = R"eso((signature (E 2))
(exists2 ((< 2 extends E))
  (forall (x y z)
    (and (implies (E x y) (< x y))
         (not (< x x))
         (implies (and (< x y) (< y z)) (< x z))
         (or (< x y) (< y x) (= x y))))))eso";

static const char* kTwoColorText = R"eso((signature (E 2))
(exists2 ((E1 2 extends E))
  (forall (x y z)
    (and (implies (E x y) (E1 x y))
         (not (E1 x x))
         (or (not (E1 x y)) (E1 y x))
         (or (not (E1 x y)) (E1 x z) (E1 z y))
         (or (not (E1 x y)) (not (E1 y z)) (not (E1 z x)))))))eso";

TEST_CASE("parse_sentence basics") {
    EsoSentence dag = parse_sentence(kDagText);
    CHECK(dag.existentials.size() == 1);
    CHECK(dag.existentials[0].name == "<");
    CHECK(dag.existentials[0].arity == 2);
    CHECK(dag.existentials[0].extendsSym == "E");
    CHECK(dag.inputSig.has("E"));

    EsoSentence irr =
        parse_sentence("(signature (E 2)) (forall (x) (not (E x x)))");
    CHECK(irr.is_fo());
    CHECK(irr.matrix->kind == FKind::Forall);

    CHECK_THROWS_AS(parse_sentence("(signature (E 2)) (E x y)"), ParseError);
    CHECK_THROWS_AS(
        parse_sentence("(signature (E 2)) (forall (x) (F x x))"),
        UnknownSymbol);
    CHECK_THROWS_AS(parse_sentence("(signature (E 2)) (forall (x) (E x))"),
                    ArityError);
    CHECK_THROWS_AS(
        parse_sentence(
            "(signature (E 2)) (exists2 ((E 2)) (forall (x) (E x x)))"),
        DuplicateExistential);
    CHECK_THROWS_AS(
        parse_sentence("(signature (E 2)) (exists2 ((R 1) (R 1)) "
                       "(forall (x) (R x)))"),
        DuplicateExistential);
    CHECK_THROWS_AS(
        parse_sentence("(signature (E 2)) (exists2 ((R 1 extends Q)) "
                       "(forall (x) (R x)))"),
        UnknownSymbol);
    CHECK_THROWS_AS(
        parse_sentence("(signature (E 2)) (exists2 ((R 1 extends E)) "
                       "(forall (x) (R x)))"),
        ArityError);
}

TEST_CASE("comments and round trip") {
    EsoSentence s = parse_sentence(
        "; a sentence\n(signature (E 2)) ; sig\n(forall (x) (not (E x x)))");
    std::string text = serialize_sentence(s);
    EsoSentence back = parse_sentence(text);
    CHECK(formula_equal(s.matrix, back.matrix));
    CHECK(s.inputSig == back.inputSig);

    EsoSentence dag = parse_sentence(kDagText);
    EsoSentence dag2 = parse_sentence(serialize_sentence(dag));
    CHECK(formula_equal(dag.matrix, dag2.matrix));
    CHECK(dag.existentials.size() == dag2.existentials.size());
    for (size_t i = 0; i < dag.existentials.size(); ++i) {
        CHECK(dag.existentials[i].name == dag2.existentials[i].name);
        CHECK(dag.existentials[i].extendsSym ==
              dag2.existentials[i].extendsSym);
    }
}

TEST_CASE("to_prenex_cnf on symmetry implication") {
    FormulaPtr f = f_forall(
        {"x", "y"},
        f_implies(f_atom("E", {"x", "y"}), f_atom("E", {"y", "x"})));
    FormulaPtr g = to_prenex_cnf(f);
    CHECK(formula_to_sexpr(g) ==
          "(forall (x0 x1) (or (not (E x0 x1)) (E x1 x0)))");
}

TEST_CASE("equality literal elimination in clauses") {
    FormulaPtr f = f_forall(
        {"x", "y"},
        f_or({f_not(f_eq("x", "y")), f_atom("E", {"x", "y"})}));
    FormulaPtr g = to_prenex_cnf(f);
    CHECK(formula_to_sexpr(g) == "(forall (x0 x1) (E x0 x0))");

    // Existentially quantified variables keep the literal.
    FormulaPtr h = f_exists(
        {"x", "y"},
        f_and({f_not(f_eq("x", "y")), f_atom("E", {"x", "y"})}));
    FormulaPtr hn = to_prenex_cnf(h);
    CHECK(formula_to_sexpr(hn) ==
          "(exists (x0 x1) (and (not (= x0 x1)) (E x0 x1)))");
}

TEST_CASE("to_prenex_cnf idempotent and constant folding") {
    EsoSentence dag = parse_sentence(kDagText);
    FormulaPtr once = to_prenex_cnf(dag.matrix);
    FormulaPtr twice = to_prenex_cnf(once);
    CHECK(formula_equal(once, twice));

    // x = x is a tautology; !(x = x) an empty clause.
    CHECK(formula_to_sexpr(to_prenex_cnf(f_forall({"x"}, f_eq("x", "x")))) ==
          "true");
    CHECK(formula_to_sexpr(
              to_prenex_cnf(f_forall({"x"}, f_not(f_eq("x", "x"))))) ==
          "false");

    // Tautological clauses vanish.
    FormulaPtr taut = f_forall(
        {"x"}, f_or({f_atom("E", {"x", "x"}), f_not(f_atom("E", {"x", "x"}))}));
    CHECK(formula_to_sexpr(to_prenex_cnf(taut)) == "true");
}

TEST_CASE("CnfBlowup on tiny budget") {
    // (a1 & b1) | (a2 & b2) | ... distributes exponentially.
    std::vector<FormulaPtr> parts;
    for (int i = 0; i < 6; ++i)
        parts.push_back(f_and({f_atom("E", {"x", "x"}), f_atom("E", {"y", "y"}),
                               f_atom("E", {"x", "y"})}));
    FormulaPtr f = f_forall({"x", "y"}, f_or(parts));
    CnfOptions tight;
    tight.literalBudget = 20;
    CHECK_THROWS_AS(to_prenex_cnf(f, tight), CnfBlowup);
}

TEST_CASE("quantifier prefix order by first occurrence") {
    // exists inside conjunct after a forall conjunct.
    FormulaPtr f = f_and({f_forall({"x"}, f_atom("U", {"x"})),
                          f_exists({"y"}, f_atom("U", {"y"}))});
    PrenexCnf p = to_pcnf(f);
    REQUIRE(p.prefix.size() == 2);
    CHECK(p.prefix[0].first == true);
    CHECK(p.prefix[1].first == false);
}

TEST_CASE("classify two-coloring sentence") {
    EsoSentence s = parse_sentence(kTwoColorText);
    FragmentReport r = classify(s);
    CHECK(!r.isFO);
    CHECK(r.isSNP);
    CHECK(!r.isMonadic);
    CHECK(r.isMonotone);  // only the input symbol E must appear negatively
    CHECK(r.isEqualityFree);
    CHECK(r.isExtensional);
    REQUIRE(r.extensionalPairs.size() == 1);
    CHECK(r.extensionalPairs[0] ==
          std::pair<std::string, std::string>{"E1", "E"});
}

TEST_CASE("classify dag sentence") {
    EsoSentence s = parse_sentence(kDagText);
    FragmentReport r = classify(s);
    CHECK(r.isSNP);
    CHECK(r.isExtensional);
    CHECK(!r.isMonotone);      // totality clause has a positive equality
    CHECK(!r.isEqualityFree);
    CHECK(!r.isConnected);
}

TEST_CASE("classify metamorphic: extra primed atom kills extensionality") {
    std::string text = R"((signature (E 2))
(exists2 ((E1 2 extends E))
  (forall (x y)
    (and (implies (E x y) (E1 x y))
         (not (E x x))))))";
    EsoSentence s = parse_sentence(text);
    CHECK(!classify(s).isExtensional);

    // Missing extension clause entirely.
    std::string text2 = R"((signature (E 2))
(exists2 ((E1 2 extends E))
  (forall (x y) (not (E1 x x)))))";
    CHECK(!classify(parse_sentence(text2)).isExtensional);

    // Undeclared existential pairing.
    std::string text3 = R"((signature (E 2))
(exists2 ((E1 2))
  (forall (x y) (implies (E x y) (E1 x y)))))";
    CHECK(!classify(parse_sentence(text3)).isExtensional);
}

TEST_CASE("classify FO universal sentence") {
    EsoSentence s =
        parse_sentence("(signature (E 2)) (forall (x) (not (E x x)))");
    FragmentReport r = classify(s);
    CHECK(r.isFO);
    CHECK(r.isSNP);
    CHECK(r.isMonadic);
    CHECK(r.isMonotone);
    CHECK(r.isExtensional);  // vacuously: no existentials
    CHECK(r.isConnected);
}

TEST_CASE("canonical_database") {
    Signature sig;
    sig.add("E", 2);
    FormulaPtr clause =
        f_or({f_not(f_atom("E", {"x", "y"})), f_not(f_atom("E", {"y", "z"})),
              f_atom("E", {"x", "z"})});
    std::vector<std::string> vars;
    Structure db = canonical_database(clause, sig, &vars);
    CHECK(vars == std::vector<std::string>{"x", "y", "z"});
    CHECK(db.n == 3);
    CHECK(db.tuples("E") == TupleSet{{0, 1}, {1, 2}});

    Structure pos = canonical_database(
        f_or({f_atom("E", {"x", "y"}), f_atom("E", {"y", "x"})}), sig);
    CHECK(pos.tuples("E").empty());
    CHECK(connected_components(pos).size() == 2);

    Structure loop = canonical_database(f_not(f_atom("E", {"x", "x"})), sig);
    CHECK(loop.n == 1);
    CHECK(loop.has_tuple("E", {0, 0}));

    CHECK_THROWS_AS(
        canonical_database(f_or({f_eq("x", "y"), f_atom("E", {"x", "y"})}),
                           sig),
        PositiveEquality);
}

TEST_CASE("relativize") {
    FormulaPtr phi = f_forall({"x"}, f_not(f_atom("E", {"x", "x"})));
    FormulaPtr psi = f_atom("U", {"y"});
    CHECK(formula_to_sexpr(relativize(phi, psi)) ==
          "(forall (x) (implies (U x) (not (E x x))))");

    FormulaPtr ex = f_exists({"x"}, f_atom("E", {"x", "x"}));
    CHECK(formula_to_sexpr(relativize(ex, psi)) ==
          "(exists (x) (and (U x) (E x x)))");

    CHECK(formula_equal(relativize(phi, f_true()), phi));

    FormulaPtr notPrenex =
        f_and({f_forall({"x"}, f_atom("U", {"x"})),
               f_forall({"y"}, f_atom("U", {"y"}))});
    CHECK_THROWS_AS(relativize(notPrenex, psi), NotPrenex);
}

TEST_CASE("subst_vars is capture avoiding") {
    FormulaPtr f = f_exists({"y"}, f_atom("E", {"x", "y"}));
    FormulaPtr g = subst_vars(f, {{"x", "y"}});
    REQUIRE(g->kind == FKind::Exists);
    CHECK(g->vars[0] != "y");
    CHECK(g->kids[0]->vars[0] == "y");
    CHECK(g->kids[0]->vars[1] == g->vars[0]);
}

TEST_CASE("free_vars and is_prenex") {
    FormulaPtr f = f_forall({"x"}, f_atom("E", {"x", "y"}));
    CHECK(free_vars(f) == std::set<std::string>{"y"});
    CHECK(is_prenex(f));
    CHECK(!is_prenex(f_and({f_forall({"x"}, f_atom("U", {"x"})),
                            f_atom("U", {"y"})})));
}
