#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eso/eval.hpp"
#include "eso/logic.hpp"
#include "eso/relcore.hpp"

namespace eso {

// Chosen tuple sets for the existential symbols over a fixed base structure.
struct ExtensionState {
    Structure base;
    std::map<std::string, TupleSet> assigned;
};

// Base structure plus assigned existential relations, over the full signature.
Structure expand_structure(const EsoSentence& psi, const Structure& base,
                           const std::map<std::string, TupleSet>& assigned);

enum class Strategy { Bruteforce, Selfreduce };

struct SolverOptions {
    long long nodeBudget = 1'000'000;
};

struct Verdict {
    bool accepted = false;
    std::optional<ExtensionState> witness;
    std::optional<std::vector<Structure>> chain;
};

Verdict decide_ext_eso(const EsoSentence& psi, const Structure& a,
                       Strategy strategy = Strategy::Bruteforce,
                       const SolverOptions& opts = {});

struct StepResult {
    std::optional<bool> decided;      // set only when the base case holds
    std::vector<Structure> successors;  // one-tuple primed extensions
};
StepResult self_reduce_step(const EsoSentence& psi, const Structure& a);

using Oracle = std::function<bool(const Structure&)>;

// Witness chain A = v1 < v2 < ... < vk of single-tuple primed additions,
// each accepted by the oracle, the last one base-case decided.
std::optional<std::vector<Structure>> extract_witness(
    const EsoSentence& psi, const Structure& a, const Oracle& oracle,
    const SolverOptions& opts = {});

struct CspVerdict {
    bool accepted = false;
    std::optional<Structure> templ;  // model of phi receiving the hom
    std::optional<Morphism> hom;
};
CspVerdict decide_csp_universal(const FormulaPtr& phi, const Structure& a,
                                const EnumOptions& opts = {});

enum class ForbMode { Direct, Selfreduce };

// Does some member of fam embed into a?
bool forb_member(const std::vector<Structure>& fam, const Structure& a,
                 ForbMode mode = ForbMode::Direct);

}  // namespace eso
