#include "eso/solver.hpp"

#include <algorithm>
#include <sstream>

namespace eso {

Structure expand_structure(const EsoSentence& psi, const Structure& base,
                           const std::map<std::string, TupleSet>& assigned) {
    Structure exp(psi.full_signature(), base.n);
    for (auto& [sym, ts] : base.rels) exp.rels[sym] = ts;
    for (auto& d : psi.existentials) {
        auto it = assigned.find(d.name);
        if (it != assigned.end()) exp.rels[d.name] = it->second;
    }
    return exp;
}

namespace {

void check_input(const EsoSentence& psi, const Structure& a) {
    if (!(a.sig == psi.inputSig))
        throw SignatureMismatch(
            "structure signature differs from the sentence's input signature");
}

// Exhaustive search over all subsets of the free tuple slots.
struct BruteSearch {
    const EsoSentence& psi;
    const Structure& a;
    long long budget;
    long long leaves = 0;
    Structure exp;
    std::vector<std::pair<std::string, Tuple>> slots;

    BruteSearch(const EsoSentence& p, const Structure& s, long long b)
        : psi(p), a(s), budget(b), exp(p.full_signature(), s.n) {
        for (auto& [sym, ts] : a.rels) exp.rels[sym] = ts;
        for (auto& d : psi.existentials) {
            TupleSet seed;
            if (d.extendsSym) seed = a.tuples(*d.extendsSym);
            exp.rels[d.name] = seed;
            for (auto& t : all_tuples(a.n, d.arity))
                if (!seed.count(t)) slots.emplace_back(d.name, t);
        }
    }

    bool dfs(size_t i) {
        if (i == slots.size()) {
            if (++leaves > budget)
                throw BudgetExceeded("extension search node budget");
            return eval_fo(psi.matrix, exp);
        }
        if (dfs(i + 1)) return true;  // leave the slot empty first
        exp.rels[slots[i].first].insert(slots[i].second);
        if (dfs(i + 1)) return true;
        exp.rels[slots[i].first].erase(slots[i].second);
        return false;
    }
};

std::string primed_key(const EsoSentence& psi, const Structure& a) {
    std::ostringstream out;
    for (auto& d : psi.existentials) {
        out << '|';
        for (auto& t : a.tuples(*d.extendsSym)) {
            for (int e : t) out << e << ',';
            out << ';';
        }
    }
    return out.str();
}

struct SelfReduceSearch {
    const EsoSentence& psi;
    long long budget;
    long long nodes = 0;
    std::map<std::string, bool> memo;
    std::optional<ExtensionState> witness;

    bool dfs(const Structure& cur) {
        std::string key = primed_key(psi, cur);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        if (++nodes > budget)
            throw BudgetExceeded("self-reduction node budget");
        StepResult st = self_reduce_step(psi, cur);
        bool acc = false;
        if (st.decided) {
            acc = *st.decided;
            if (acc && !witness) {
                ExtensionState w;
                w.base = cur;
                for (auto& d : psi.existentials)
                    w.assigned[d.name] = cur.tuples(*d.extendsSym);
                witness = w;
            }
        } else {
            for (auto& s : st.successors)
                if (dfs(s)) {
                    acc = true;
                    break;
                }
        }
        memo[key] = acc;
        return acc;
    }
};

}  // namespace

StepResult self_reduce_step(const EsoSentence& psi, const Structure& a) {
    check_input(psi, a);
    for (auto& d : psi.existentials)
        if (!d.extendsSym)
            throw NotExtensional("existential " + d.name +
                                 " extends no input symbol");
    std::map<std::string, TupleSet> assigned;
    for (auto& d : psi.existentials)
        assigned[d.name] = a.tuples(*d.extendsSym);
    StepResult r;
    if (eval_fo(psi.matrix, expand_structure(psi, a, assigned))) {
        r.decided = true;
        return r;
    }
    for (auto& d : psi.existentials)
        for (auto& t : all_tuples(a.n, d.arity))
            if (!a.has_tuple(*d.extendsSym, t)) {
                Structure next = a;
                next.add_tuple(*d.extendsSym, t);
                r.successors.push_back(std::move(next));
            }
    return r;
}

Verdict decide_ext_eso(const EsoSentence& psi, const Structure& a,
                       Strategy strategy, const SolverOptions& opts) {
    check_input(psi, a);
    Verdict v;
    if (strategy == Strategy::Bruteforce) {
        BruteSearch search(psi, a, opts.nodeBudget);
        if (search.dfs(0)) {
            v.accepted = true;
            ExtensionState w;
            w.base = a;
            for (auto& d : psi.existentials)
                w.assigned[d.name] = search.exp.tuples(d.name);
            v.witness = w;
        }
        return v;
    }
    for (auto& d : psi.existentials)
        if (!d.extendsSym)
            throw NotExtensional("existential " + d.name +
                                 " extends no input symbol");
    SelfReduceSearch search{psi, opts.nodeBudget};
    v.accepted = search.dfs(a);
    if (v.accepted && search.witness) {
        // Report extensions relative to the original input structure.
        search.witness->base = a;
        v.witness = search.witness;
    }
    return v;
}

std::optional<std::vector<Structure>> extract_witness(
    const EsoSentence& psi, const Structure& a, const Oracle& oracle,
    const SolverOptions& opts) {
    check_input(psi, a);
    if (!oracle(a)) return std::nullopt;
    std::vector<Structure> chain = {a};
    long long steps = 0;
    while (true) {
        if (++steps > opts.nodeBudget)
            throw BudgetExceeded("witness chain length budget");
        StepResult st = self_reduce_step(psi, chain.back());
        if (st.decided) return chain;
        bool advanced = false;
        for (auto& s : st.successors)
            if (oracle(s)) {
                chain.push_back(s);
                advanced = true;
                break;
            }
        if (!advanced)
            throw OracleInconsistent(
                "oracle accepts the instance but no successor probe");
    }
}

CspVerdict decide_csp_universal(const FormulaPtr& phi, const Structure& a,
                                const EnumOptions& opts) {
    if (!is_universal(phi))
        throw BadParams("CSP decision requires a universal sentence");
    CspVerdict v;
    enumerate_structures(
        a.sig, a.n, true,
        [&](const Structure& b) {
            if (!eval_fo(phi, b)) return true;
            auto hom = find_morphism(a, b, MorphKind::Hom);
            if (!hom) return true;
            v.accepted = true;
            v.templ = b;
            v.hom = hom;
            return false;
        },
        opts);
    return v;
}

namespace {

bool forb_rec(const std::vector<Structure>& fam, const Structure& cur,
              std::map<std::string, bool>& memo) {
    std::string key = canonical_form(cur);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool acc = false;
    for (auto& f : fam)
        if (f.sig == cur.sig && isomorphic(f, cur)) {
            acc = true;
            break;
        }
    if (!acc && cur.n > 1) {
        for (int v = 0; v < cur.n && !acc; ++v) {
            std::vector<int> keep;
            for (int u = 0; u < cur.n; ++u)
                if (u != v) keep.push_back(u);
            acc = forb_rec(fam, substructure(cur, keep), memo);
        }
    }
    memo[key] = acc;
    return acc;
}

}  // namespace

bool forb_member(const std::vector<Structure>& fam, const Structure& a,
                 ForbMode mode) {
    if (mode == ForbMode::Direct) {
        for (auto& f : fam)
            if (f.sig == a.sig &&
                find_morphism(f, a, MorphKind::Embedding))
                return true;
        return false;
    }
    std::map<std::string, bool> memo;
    return forb_rec(fam, a, memo);
}

}  // namespace eso
