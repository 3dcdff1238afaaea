#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eso/relcore.hpp"

namespace eso {

enum class FKind {
    Forall,
    Exists,
    And,
    Or,
    Not,
    Implies,
    Iff,
    Atom,
    Eq,
    True,
    False
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FKind kind = FKind::True;
    std::vector<std::string> vars;  // quantified vars / atom args / eq pair
    std::string sym;                // atom relation symbol
    std::vector<FormulaPtr> kids;
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(const std::string& sym, std::vector<std::string> vars);
FormulaPtr f_eq(const std::string& a, const std::string& b);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(std::vector<FormulaPtr> kids);   // empty -> true
FormulaPtr f_or(std::vector<FormulaPtr> kids);    // empty -> false
FormulaPtr f_implies(FormulaPtr l, FormulaPtr r);
FormulaPtr f_iff(FormulaPtr l, FormulaPtr r);
FormulaPtr f_forall(std::vector<std::string> vars, FormulaPtr body);
FormulaPtr f_exists(std::vector<std::string> vars, FormulaPtr body);

std::set<std::string> free_vars(const FormulaPtr& f);
bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);
std::string formula_to_sexpr(const FormulaPtr& f);

// Capture-avoiding substitution of free variable occurrences.
FormulaPtr subst_vars(const FormulaPtr& f,
                      const std::map<std::string, std::string>& sub);

struct EsoDecl {
    std::string name;
    int arity = 1;
    std::optional<std::string> extendsSym;
};

struct EsoSentence {
    Signature inputSig;
    std::vector<EsoDecl> existentials;
    FormulaPtr matrix;

    bool is_fo() const { return existentials.empty(); }
    Signature full_signature() const;
};

EsoSentence parse_sentence(const std::string& text);
std::string serialize_sentence(const EsoSentence& s);

struct CnfOptions {
    long long literalBudget = 100'000;
};

struct Literal {
    bool neg = false;
    bool isEq = false;
    std::string sym;                 // empty for equality literals
    std::vector<std::string> vars;

    bool operator==(const Literal& o) const {
        return neg == o.neg && isEq == o.isEq && sym == o.sym &&
               vars == o.vars;
    }
    bool operator<(const Literal& o) const {
        return std::tie(isEq, sym, vars, neg) <
               std::tie(o.isEq, o.sym, o.vars, o.neg);
    }
};

// Prenex conjunctive normal form with prefix variables renamed x0, x1, ...
struct PrenexCnf {
    std::vector<std::pair<bool, std::string>> prefix;  // (isForall, var)
    std::vector<std::vector<Literal>> clauses;
    bool constantFalse = false;  // an empty clause was derived

    FormulaPtr to_formula() const;
};

PrenexCnf to_pcnf(const FormulaPtr& f, const CnfOptions& opts = {});
FormulaPtr to_prenex_cnf(const FormulaPtr& f, const CnfOptions& opts = {});

struct FragmentReport {
    bool isFO = false;
    bool isSNP = false;
    bool isMonadic = false;
    bool isMonotone = false;
    bool isConnected = false;
    bool isEqualityFree = false;
    bool isExtensional = false;
    std::vector<std::pair<std::string, std::string>> extensionalPairs;
    std::map<std::string, std::string> diagnostics;
};

FragmentReport classify(const EsoSentence& s, const CnfOptions& opts = {});

// Structure read off a clause's negative relational literals; domain is the
// clause's variables in first-occurrence order (reported via varOrder).
Structure canonical_database(const FormulaPtr& clause, const Signature& sig,
                             std::vector<std::string>* varOrder = nullptr);

// Guarded relativization of a prenex sentence to the set defined by psi
// (a formula with at most one free variable).
FormulaPtr relativize(const FormulaPtr& phi, const FormulaPtr& psi);

bool is_prenex(const FormulaPtr& f);

}  // namespace eso
