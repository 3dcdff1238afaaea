#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eso/logic.hpp"
#include "eso/relcore.hpp"

namespace eso {

// CNF with positive literals only: every clause is a nonempty set of
// variable indices below varCount.
struct MonotoneCnf {
    int varCount = 0;
    std::vector<std::set<int>> clauses;

    bool operator==(const MonotoneCnf& o) const {
        return varCount == o.varCount && clauses == o.clauses;
    }
};

// Graph isomorphism completion instance: two symmetric loopless graphs over
// {E/2} plus a partial injective map from g-vertices to h-vertices.
struct GiInstance {
    Structure g, h;
    std::vector<std::pair<int, int>> partial;
};

// Acyclicity of a digraph: some strict linear order extends the edges.
EsoSentence encode_dag();

// 3-colourability with pre-assigned colour classes R'/G'/B'.
EsoSentence encode_precol3();

// k-colourability: some complete k-partite supergraph contains the edges.
EsoSentence encode_kcolor(int k);

// Sandwich problem for the graphs avoiding every member of `forbidden`
// (induced): input edges E and non-edges N, existential edge set between
// them with its complement N'.
EsoSentence encode_sandwich(const std::vector<Structure>& forbidden);

// Orientation completion: extend the partial orientation A' to a full
// orientation of E avoiding every member of `forbidden` (induced).
EsoSentence encode_orient(const std::vector<Structure>& forbidden);

// Constraint topological sorting: a topological sort of the input DAG whose
// letter sequence satisfies phi. phi may use the alphabet's unary symbols,
// "<", "s" (successor, expanded inline from "<") and equality.
EsoSentence encode_cts(const FormulaPtr& phi,
                       const std::vector<std::string>& alphabet);

// Full homomorphism to b, as a plain first-order sentence (embedding-
// minimal obstructions forbidden).
EsoSentence encode_csp_full(const Structure& b);

// Homomorphism to b: some extension admits a full homomorphism to b.
EsoSentence encode_csp(const Structure& b);

// Surjective homomorphism to b: as encode_csp plus a realized diagram of b
// on pairwise distinct elements.
EsoSentence encode_surj_csp(const Structure& b);

// Graph isomorphism completion over {U1/1, U2/1, E/2, I'/2}.
EsoSentence encode_gi();

// Non-duality of a pair of monotone CNFs over {U1'/1, Uf/1, Ug/1, C/2, EQ/2}.
EsoSentence encode_mdual();

// The n-th Henson tournament on vertices {0..n-1}; requires n >= 5.
Structure henson(int n);

// Encode a GI completion instance as a structure for encode_gi; invalid
// instances map to a canonical rejected structure.
Structure build_gi_instance(const GiInstance& inst);

// Decode a structure back into a GI completion instance; structures the
// sentence rejects for shape reasons map to a fixed no-instance.
GiInstance reverse_gi(const Structure& a);

// Encode a pair of monotone CNFs over the same variables as a structure for
// encode_mdual. Throws VariableMismatch unless both formulas use the same
// varCount and every variable occurs in each formula.
Structure build_mdual_instance(const MonotoneCnf& phi, const MonotoneCnf& psi);

// Decode a structure back into a CNF pair; structures violating the shape
// axioms map to a fixed designated pair.
std::pair<MonotoneCnf, MonotoneCnf> reverse_mdual(const Structure& a);

}  // namespace eso
