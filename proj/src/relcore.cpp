#include "eso/relcore.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace eso {

bool valid_symbol_name(const std::string& name) {
    if (name == "<") return true;  // order relations keep their usual glyph
    if (name.empty() || !std::isalpha(static_cast<unsigned char>(name[0])))
        return false;
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'')
            return false;
    return true;
}

void Signature::add(const std::string& name, int arity) {
    if (!valid_symbol_name(name))
        throw ParseError("bad relation symbol name '" + name + "'");
    if (arity < 1)
        throw ArityError("arity of " + name + " must be positive");
    if (has(name))
        throw ParseError("duplicate relation symbol '" + name + "'");
    symbols.emplace_back(name, arity);
}

bool Signature::has(const std::string& name) const {
    for (auto& [s, a] : symbols)
        if (s == name) return true;
    return false;
}

int Signature::arity(const std::string& name) const {
    for (auto& [s, a] : symbols)
        if (s == name) return a;
    throw UnknownSymbol("relation symbol '" + name + "'");
}

int Signature::index_of(const std::string& name) const {
    for (size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i].first == name) return static_cast<int>(i);
    throw UnknownSymbol("relation symbol '" + name + "'");
}

Structure::Structure(Signature s, int domain) : sig(std::move(s)), n(domain) {
    if (n < 1) throw EmptyDomain("structures have nonempty domains");
    for (auto& [name, a] : sig.symbols) rels[name];
}

static const TupleSet kEmptyTuples;

const TupleSet& Structure::tuples(const std::string& sym) const {
    auto it = rels.find(sym);
    return it == rels.end() ? kEmptyTuples : it->second;
}

bool Structure::has_tuple(const std::string& sym, const Tuple& t) const {
    auto it = rels.find(sym);
    return it != rels.end() && it->second.count(t) > 0;
}

void Structure::add_tuple(const std::string& sym, const Tuple& t) {
    int a = sig.arity(sym);
    if (static_cast<int>(t.size()) != a)
        throw ArityError("tuple for " + sym + " has " +
                         std::to_string(t.size()) + " entries, expected " +
                         std::to_string(a));
    for (int e : t)
        if (e < 0 || e >= n)
            throw RangeError("element " + std::to_string(e) +
                             " outside domain of size " + std::to_string(n));
    rels[sym].insert(t);
}

void Structure::validate() const {
    if (n < 1) throw EmptyDomain("structures have nonempty domains");
    for (auto& [sym, ts] : rels) {
        int a = sig.arity(sym);
        for (auto& t : ts) {
            if (static_cast<int>(t.size()) != a)
                throw ArityError("tuple arity mismatch for " + sym);
            for (int e : t)
                if (e < 0 || e >= n)
                    throw RangeError("element out of range in " + sym);
        }
    }
}

bool Structure::operator<(const Structure& o) const {
    if (n != o.n) return n < o.n;
    if (sig.symbols != o.sig.symbols) return sig.symbols < o.sig.symbols;
    return rels < o.rels;
}

// ---------------------------------------------------------------------------
// Text format

Structure parse_structure(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool haveSig = false, haveDom = false;
    Signature sig;
    int n = 0;
    std::vector<std::pair<std::string, Tuple>> pending;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "signature") {
            if (haveSig)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": duplicate signature directive");
            std::string decl;
            while (ls >> decl) {
                auto slash = decl.rfind('/');
                if (slash == std::string::npos)
                    throw ParseError("line " + std::to_string(lineno) +
                                     ": expected name/arity, got '" + decl + "'");
                std::string name = decl.substr(0, slash);
                int arity;
                try {
                    arity = std::stoi(decl.substr(slash + 1));
                } catch (const std::exception&) {
                    throw ParseError("line " + std::to_string(lineno) +
                                     ": bad arity in '" + decl + "'");
                }
                sig.add(name, arity);
            }
            if (sig.symbols.empty())
                throw ParseError("line " + std::to_string(lineno) +
                                 ": empty signature");
            haveSig = true;
        } else if (head == "domain") {
            if (!haveSig)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": domain before signature");
            if (haveDom)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": duplicate domain directive");
            if (!(ls >> n) || n < 1)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": domain size must be a positive integer");
            std::string junk;
            if (ls >> junk)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": trailing tokens after domain size");
            haveDom = true;
        } else {
            if (!haveSig || !sig.has(head))
                throw ParseError("line " + std::to_string(lineno) +
                                 ": unknown relation symbol '" + head + "'");
            Tuple t;
            int e;
            while (ls >> e) t.push_back(e);
            std::string junk;
            ls.clear();
            if (ls >> junk)
                throw ParseError("line " + std::to_string(lineno) +
                                 ": non-numeric tuple entry '" + junk + "'");
            pending.emplace_back(head, std::move(t));
        }
    }
    if (!haveSig) throw ParseError("missing signature directive");
    if (!haveDom) throw ParseError("missing domain directive");
    Structure a(sig, n);
    for (auto& [sym, t] : pending) a.add_tuple(sym, t);
    return a;
}

std::string serialize_structure(const Structure& a) {
    std::ostringstream out;
    out << "signature";
    for (auto& [name, arity] : a.sig.symbols) out << ' ' << name << '/' << arity;
    out << '\n' << "domain " << a.n << '\n';
    for (auto& [name, arity] : a.sig.symbols) {
        for (auto& t : a.tuples(name)) {
            out << name;
            for (int e : t) out << ' ' << e;
            out << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Substructures and unions

Structure substructure(const Structure& a, const std::vector<int>& keep) {
    if (keep.empty()) throw EmptyDomain("substructure on empty subset");
    std::vector<int> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> newIndex(a.n, -1);
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0 || sorted[i] >= a.n)
            throw RangeError("substructure subset element out of range");
        newIndex[sorted[i]] = static_cast<int>(i);
    }
    Structure b(a.sig, static_cast<int>(sorted.size()));
    for (auto& [sym, ts] : a.rels) {
        for (auto& t : ts) {
            Tuple u(t.size());
            bool inside = true;
            for (size_t i = 0; i < t.size(); ++i) {
                if (newIndex[t[i]] < 0) { inside = false; break; }
                u[i] = newIndex[t[i]];
            }
            if (inside) b.rels[sym].insert(u);
        }
    }
    return b;
}

void enumerate_substructures(
    const Structure& a,
    const std::function<bool(const std::vector<int>&, const Structure&)>& visit) {
    for (int k = 1; k <= a.n; ++k) {
        std::vector<int> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            if (!visit(idx, substructure(a, idx))) return;
            int i = k - 1;
            while (i >= 0 && idx[i] == a.n - k + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
}

Structure disjoint_union(const Structure& a, const Structure& b) {
    if (!(a.sig == b.sig))
        throw SignatureMismatch("disjoint union needs equal signatures");
    Structure c(a.sig, a.n + b.n);
    for (auto& [sym, ts] : a.rels) c.rels[sym].insert(ts.begin(), ts.end());
    for (auto& [sym, ts] : b.rels) {
        for (auto& t : ts) {
            Tuple u = t;
            for (int& e : u) e += a.n;
            c.rels[sym].insert(u);
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Morphism search

namespace {

struct MorphSearch {
    const Structure& a;
    const Structure& b;
    MorphKind kind;
    std::vector<int> map;        // source -> target or -1
    std::vector<int> covered;    // target coverage counts (surjective kinds)
    bool needInjective, needFull, needSurjective;

    MorphSearch(const Structure& a_, const Structure& b_, MorphKind k)
        : a(a_), b(b_), kind(k), map(a_.n, -1), covered(b_.n, 0) {
        needInjective = kind == MorphKind::Embedding;
        needFull = kind == MorphKind::Embedding || kind == MorphKind::Full ||
                   kind == MorphKind::FullSurj;
        needSurjective =
            kind == MorphKind::SurjHom || kind == MorphKind::FullSurj;
    }

    // Checks all tuples over already-assigned sources that involve v.
    bool consistent(int v) const {
        for (auto& [sym, arity] : a.sig.symbols) {
            if (!check_symbol(sym, arity, v)) return false;
        }
        return true;
    }

    bool check_symbol(const std::string& sym, int arity, int v) const {
        // Enumerate all arity-tuples over assigned sources containing v.
        std::vector<int> assigned;
        for (int i = 0; i < a.n; ++i)
            if (map[i] >= 0) assigned.push_back(i);
        Tuple t(arity);
        return scan(sym, assigned, t, 0, v, false);
    }

    bool scan(const std::string& sym, const std::vector<int>& assigned,
              Tuple& t, int pos, int v, bool hasV) const {
        int arity = static_cast<int>(t.size());
        if (pos == arity) {
            if (!hasV) return true;
            Tuple img(arity);
            for (int i = 0; i < arity; ++i) img[i] = map[t[i]];
            bool inA = a.has_tuple(sym, t);
            bool inB = b.has_tuple(sym, img);
            if (inA && !inB) return false;
            if (needFull && inB && !inA) return false;
            return true;
        }
        for (int s : assigned) {
            t[pos] = s;
            if (!scan(sym, assigned, t, pos + 1, v, hasV || s == v))
                return false;
        }
        return true;
    }

    bool extend(int v) {
        if (v == a.n) {
            if (needSurjective)
                for (int c : covered)
                    if (c == 0) return false;
            return true;
        }
        for (int w = 0; w < b.n; ++w) {
            if (needInjective && covered[w] > 0) continue;
            map[v] = w;
            ++covered[w];
            bool ok = true;
            if (needSurjective) {
                int uncovered = 0;
                for (int c : covered)
                    if (c == 0) ++uncovered;
                if (uncovered > a.n - v - 1) ok = false;
            }
            if (ok && consistent(v) && extend(v + 1)) return true;
            --covered[w];
            map[v] = -1;
        }
        return false;
    }
};

}  // namespace

std::optional<Morphism> find_morphism(const Structure& a, const Structure& b,
                                      MorphKind kind) {
    if (!(a.sig == b.sig))
        throw SignatureMismatch("morphism search needs equal signatures");
    MorphSearch search(a, b, kind);
    if (!search.extend(0)) return std::nullopt;
    Morphism m;
    m.map = search.map;
    m.kind = kind;
    return m;
}

// ---------------------------------------------------------------------------
// Twins, quotients and blow-ups

bool twin_pair(const Structure& a, int x, int y) {
    if (x == y) return false;
    for (auto& [sym, arity] : a.sig.symbols) {
        Tuple t(arity, 0);
        while (true) {
            for (int i = 0; i < arity; ++i) {
                if (t[i] != x) continue;
                Tuple u = t;
                u[i] = y;
                if (a.has_tuple(sym, t) != a.has_tuple(sym, u)) return false;
            }
            int i = arity - 1;
            while (i >= 0 && t[i] == a.n - 1) t[i--] = 0;
            if (i < 0) break;
            ++t[i];
        }
    }
    return true;
}

std::set<std::pair<int, int>> twins(const Structure& a) {
    std::set<std::pair<int, int>> out;
    for (int x = 0; x < a.n; ++x)
        for (int y = x + 1; y < a.n; ++y)
            if (twin_pair(a, x, y)) out.insert({x, y});
    return out;
}

bool point_determining(const Structure& a) { return twins(a).empty(); }

Quotient twin_quotient(const Structure& a) {
    Structure cur = a;
    std::vector<int> proj(a.n);
    std::iota(proj.begin(), proj.end(), 0);
    while (true) {
        auto tw = twins(cur);
        if (tw.empty()) break;
        // Union-find over the twin pairs of the current structure.
        std::vector<int> parent(cur.n);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (auto& [x, y] : tw) parent[find(y)] = find(x);
        std::vector<int> repIndex(cur.n, -1);
        int m = 0;
        for (int v = 0; v < cur.n; ++v)
            if (find(v) == v) repIndex[v] = m++;
        std::vector<int> cls(cur.n);
        for (int v = 0; v < cur.n; ++v) cls[v] = repIndex[find(v)];
        Structure next(cur.sig, m);
        for (auto& [sym, ts] : cur.rels)
            for (auto& t : ts) {
                Tuple u(t.size());
                for (size_t i = 0; i < t.size(); ++i) u[i] = cls[t[i]];
                next.rels[sym].insert(u);
            }
        for (int v = 0; v < a.n; ++v) proj[v] = cls[proj[v]];
        cur = std::move(next);
    }
    Quotient q;
    q.b0 = cur;
    q.projection.map = proj;
    q.projection.kind = MorphKind::FullSurj;
    return q;
}

Structure blow_up(const Structure& a, const std::vector<int>& mult) {
    if (static_cast<int>(mult.size()) != a.n)
        throw BadParams("multiplicity vector length mismatch");
    std::vector<int> offset(a.n + 1, 0);
    for (int v = 0; v < a.n; ++v) {
        if (mult[v] < 1) throw BadParams("multiplicities must be positive");
        offset[v + 1] = offset[v] + mult[v];
    }
    Structure b(a.sig, offset[a.n]);
    for (auto& [sym, ts] : a.rels)
        for (auto& t : ts) {
            // All combinations of copies, one per coordinate.
            Tuple pick(t.size(), 0);
            while (true) {
                Tuple u(t.size());
                for (size_t i = 0; i < t.size(); ++i)
                    u[i] = offset[t[i]] + pick[i];
                b.rels[sym].insert(u);
                int i = static_cast<int>(t.size()) - 1;
                while (i >= 0 && pick[i] == mult[t[i]] - 1) pick[i--] = 0;
                if (i < 0) break;
                ++pick[i];
            }
        }
    return b;
}

// ---------------------------------------------------------------------------
// Canonical forms and enumeration

static std::string encode_rels(const Structure& a) {
    std::string out;
    for (auto& [sym, arity] : a.sig.symbols) {
        const TupleSet& ts = a.tuples(sym);
        Tuple t(arity, 0);
        while (true) {
            out.push_back(ts.count(t) ? '1' : '0');
            int i = arity - 1;
            while (i >= 0 && t[i] == a.n - 1) t[i--] = 0;
            if (i < 0) break;
            ++t[i];
        }
    }
    return out;
}

std::string canonical_form(const Structure& a) {
    if (a.n > 8)
        throw CapExceeded("canonical form is capped at domain size 8");
    std::vector<int> perm(a.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        Structure p(a.sig, a.n);
        for (auto& [sym, ts] : a.rels)
            for (auto& t : ts) {
                Tuple u(t.size());
                for (size_t i = 0; i < t.size(); ++i) u[i] = perm[t[i]];
                p.rels[sym].insert(u);
            }
        std::string enc = encode_rels(p);
        if (best.empty() || enc < best) best = std::move(enc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::to_string(a.n) + "|" + best;
}

bool isomorphic(const Structure& a, const Structure& b) {
    if (!(a.sig == b.sig) || a.n != b.n) return false;
    return canonical_form(a) == canonical_form(b);
}

void enumerate_structures(
    const Signature& sig, int maxN, bool upToIso,
    const std::function<bool(const Structure&)>& visit,
    const EnumOptions& opts) {
    if (maxN < 1) throw BadParams("maxN must be at least 1");
    long long projected = 0;
    for (int n = 1; n <= maxN; ++n) {
        long long slots = 0;
        for (auto& [sym, arity] : sig.symbols) {
            long long s = 1;
            for (int i = 0; i < arity; ++i) s *= n;
            slots += s;
        }
        if (slots >= 62)
            throw CapExceeded("structure enumeration budget exceeded");
        projected += 1LL << slots;
        if (projected > opts.cap)
            throw CapExceeded("structure enumeration budget exceeded");
    }
    for (int n = 1; n <= maxN; ++n) {
        // Slot list: symbols in declaration order, tuples lexicographic.
        std::vector<std::pair<std::string, Tuple>> slots;
        for (auto& [sym, arity] : sig.symbols) {
            Tuple t(arity, 0);
            while (true) {
                slots.emplace_back(sym, t);
                int i = arity - 1;
                while (i >= 0 && t[i] == n - 1) t[i--] = 0;
                if (i < 0) break;
                ++t[i];
            }
        }
        unsigned long long total = 1ULL << slots.size();
        for (unsigned long long mask = 0; mask < total; ++mask) {
            Structure a(sig, n);
            for (size_t i = 0; i < slots.size(); ++i)
                if (mask & (1ULL << i))
                    a.rels[slots[i].first].insert(slots[i].second);
            if (upToIso) {
                std::string enc = std::to_string(n) + "|" + encode_rels(a);
                if (canonical_form(a) != enc) continue;
            }
            if (!visit(a)) return;
        }
    }
}

std::vector<Structure> all_structures(const Signature& sig, int maxN,
                                      bool upToIso, const EnumOptions& opts) {
    std::vector<Structure> out;
    enumerate_structures(sig, maxN, upToIso,
                         [&](const Structure& a) {
                             out.push_back(a);
                             return true;
                         },
                         opts);
    return out;
}

std::vector<std::vector<int>> connected_components(const Structure& a) {
    std::vector<int> parent(a.n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (auto& [sym, ts] : a.rels)
        for (auto& t : ts)
            for (size_t i = 1; i < t.size(); ++i)
                parent[find(t[i])] = find(t[0]);
    std::map<int, std::vector<int>> groups;
    for (int v = 0; v < a.n; ++v) groups[find(v)].push_back(v);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : groups) out.push_back(members);
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x[0] < y[0]; });
    return out;
}

std::vector<Tuple> all_tuples(int n, int arity) {
    std::vector<Tuple> out;
    Tuple t(arity, 0);
    while (true) {
        out.push_back(t);
        int i = arity - 1;
        while (i >= 0 && t[i] == n - 1) t[i--] = 0;
        if (i < 0) break;
        ++t[i];
    }
    return out;
}

Structure random_structure(const Signature& sig, int n, std::mt19937_64& rng,
                           double density) {
    Structure a(sig, n);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (auto& [sym, arity] : sig.symbols) {
        Tuple t(arity, 0);
        while (true) {
            if (coin(rng) < density) a.rels[sym].insert(t);
            int i = arity - 1;
            while (i >= 0 && t[i] == n - 1) t[i--] = 0;
            if (i < 0) break;
            ++t[i];
        }
    }
    return a;
}

}  // namespace eso
