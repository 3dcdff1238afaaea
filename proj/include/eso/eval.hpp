#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eso/logic.hpp"
#include "eso/relcore.hpp"

namespace eso {

using Env = std::map<std::string, int>;

// Tarskian model checking; quantifiers range over 0..n-1.
bool eval_fo(const FormulaPtr& phi, const Structure& a, const Env& env = {});

struct HerVerdict {
    bool member = true;
    std::optional<std::vector<int>> counterexample;  // falsifying subset
};

// Every nonempty induced substructure must satisfy phi; the reported
// counterexample is the first falsifying subset size-ascending, then lex.
HerVerdict her_check(const FormulaPtr& phi, const Structure& a);

// Prenex with only universal quantifiers (quantifier-free counts).
bool is_universal(const FormulaPtr& phi);

}  // namespace eso
