#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "eso/errors.hpp"

namespace eso {

using Tuple = std::vector<int>;
using TupleSet = std::set<Tuple>;

bool valid_symbol_name(const std::string& name);

// Ordered map relation symbol -> arity.
struct Signature {
    std::vector<std::pair<std::string, int>> symbols;

    void add(const std::string& name, int arity);
    bool has(const std::string& name) const;
    int arity(const std::string& name) const;  // throws UnknownSymbol
    int index_of(const std::string& name) const;
    bool operator==(const Signature& o) const { return symbols == o.symbols; }
};

// Finite relational structure with domain {0, ..., n-1}.
struct Structure {
    Signature sig;
    int n = 1;
    std::map<std::string, TupleSet> rels;

    Structure() = default;
    Structure(Signature s, int domain);

    const TupleSet& tuples(const std::string& sym) const;
    bool has_tuple(const std::string& sym, const Tuple& t) const;
    void add_tuple(const std::string& sym, const Tuple& t);  // validates
    void validate() const;

    bool operator==(const Structure& o) const {
        return sig == o.sig && n == o.n && rels == o.rels;
    }
    bool operator<(const Structure& o) const;
};

enum class MorphKind { Hom, Embedding, Full, SurjHom, FullSurj };

struct Morphism {
    std::vector<int> map;
    MorphKind kind = MorphKind::Hom;
};

Structure parse_structure(const std::string& text);
std::string serialize_structure(const Structure& a);

Structure substructure(const Structure& a, const std::vector<int>& keep);
void enumerate_substructures(
    const Structure& a,
    const std::function<bool(const std::vector<int>&, const Structure&)>& visit);
Structure disjoint_union(const Structure& a, const Structure& b);

std::optional<Morphism> find_morphism(const Structure& a, const Structure& b,
                                      MorphKind kind);

std::set<std::pair<int, int>> twins(const Structure& a);
bool twin_pair(const Structure& a, int x, int y);
bool point_determining(const Structure& a);

struct Quotient {
    Structure b0;
    Morphism projection;  // FullSurj from the input onto b0
};
Quotient twin_quotient(const Structure& a);

Structure blow_up(const Structure& a, const std::vector<int>& mult);

// Lexicographically least relation encoding over all domain permutations.
std::string canonical_form(const Structure& a);
bool isomorphic(const Structure& a, const Structure& b);

struct EnumOptions {
    long long cap = 10'000'000;  // hard budget on candidate structures
};
void enumerate_structures(
    const Signature& sig, int maxN, bool upToIso,
    const std::function<bool(const Structure&)>& visit,
    const EnumOptions& opts = {});
std::vector<Structure> all_structures(const Signature& sig, int maxN,
                                      bool upToIso,
                                      const EnumOptions& opts = {});

std::vector<std::vector<int>> connected_components(const Structure& a);

// All tuples over {0..n-1} of the given arity, lexicographic order.
std::vector<Tuple> all_tuples(int n, int arity);

// Seeded random structure: each tuple present independently with the given
// density. Deterministic for a fixed generator state.
Structure random_structure(const Signature& sig, int n, std::mt19937_64& rng,
                           double density = 0.5);

}  // namespace eso
