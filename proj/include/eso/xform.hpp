#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eso/logic.hpp"
#include "eso/relcore.hpp"

namespace eso {

// Whether the instance transform preserves membership or flips it.
enum class Polarity { Same, Complemented };

using InstanceMap = std::function<Structure(const Structure&)>;

// A sentence-level transform together with its paired instance transforms.
// Exactly one of outSentence / outFormula is populated, depending on whether
// the target problem is given by an ESO sentence or a first-order formula.
struct Reduction {
    std::optional<EsoSentence> outSentence;
    FormulaPtr outFormula;
    InstanceMap forward;
    std::optional<InstanceMap> reverse;
    Polarity polarity = Polarity::Same;
};

// Hereditary first-order membership as the complement of a monadic extension
// problem: HER(phi) holds on A iff the produced sentence fails on forward(A).
Reduction herfo_to_exteso(const FormulaPtr& phi, const Signature& tau);

// Extension problem as the complement of a hereditary first-order problem,
// via the marker-gadget instance encoding.
Reduction exteso_to_herfo(const EsoSentence& psi);

// Monotone extensional SNP as the CSP of a universal sentence (replace each
// existential symbol by the input symbol it extends).
Reduction snp_to_csp(const EsoSentence& phi);

// Embedding-minimal falsifying structures of a universal sentence, complete
// up to the sentence's variable count.
std::vector<Structure> bounds_of_universal(const FormulaPtr& phi,
                                           const Signature& sig,
                                           const EnumOptions& opts = {});

// Existential formula with free variables x, y that holds iff x and y are
// not twins.
FormulaPtr nt_formula(const Signature& sig);

// Point-determining diagram of f, with free variables x0..x{n-1}; its
// existential closure holds on B iff f embeds into the twin quotient of B.
FormulaPtr pd_diagram(const Structure& f);

// Universal equality-free sentence accepting exactly the structures whose
// twin quotient embeds none of the bounds.
FormulaPtr blowup_sentence(const std::vector<Structure>& bounds,
                           const CnfOptions& opts = {});

// CSP of a universal sentence as a monotone extensional SNP sentence.
Reduction csp_to_snp(const FormulaPtr& phi, const Signature& sig);

// Point-determining embedding-minimal structures of size <= |B|+1 with no
// full homomorphism to b; a structure maps fully onto b iff it embeds none.
std::vector<Structure> full_csp_bounds(const Structure& b,
                                       const EnumOptions& opts = {});

// Connected extensional SNP sentence over the input signature plus a fresh
// binary input, equivalent component-wise to the given sentence.
Reduction connectedize(const EsoSentence& phi);

// Add a primed input companion (with emptiness guard and extension clause)
// for every existential symbol that extends nothing yet.
EsoSentence add_extension_scaffold(const EsoSentence& phi);

}  // namespace eso
