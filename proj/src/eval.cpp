#include "eso/eval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace eso {

namespace {

// AST compiled against a fixed structure: variables become integer slots and
// atoms hold direct relation lookups (flat table for arity <= 2).
struct CNode {
    FKind kind = FKind::True;
    std::vector<int> slots;             // quantifier / atom-arg / eq slots
    const TupleSet* tset = nullptr;     // atom, arity >= 3
    const std::vector<char>* flat = nullptr;  // atom, arity <= 2
    long long cost = 1;                 // evaluation cost estimate
    std::vector<CNode> kids;
};

class Evaluator {
  public:
    Evaluator(const FormulaPtr& phi, const Structure& a, const Env& env)
        : a_(a) {
        std::map<std::string, std::vector<int>> scopes;
        for (auto& [v, val] : env) {
            scopes[v].push_back(nextSlot_);
            fixed_.emplace_back(nextSlot_, val);
            ++nextSlot_;
        }
        root_ = compile(phi, scopes);
        env_.assign(nextSlot_, 0);
        for (auto& [slot, val] : fixed_) {
            if (val < 0 || val >= a.n)
                throw RangeError("environment value out of domain");
            env_[slot] = val;
        }
    }

    bool run() { return run(root_); }

    // Evaluate with every quantifier ranging over `domain` instead of the
    // whole structure. For a sentence this equals evaluation on the induced
    // substructure, since atoms only ever see quantified elements.
    bool run_restricted(const std::vector<int>& domain) {
        domain_ = &domain;
        bool r = run(root_);
        domain_ = nullptr;
        return r;
    }

  private:
    const Structure& a_;
    const std::vector<int>* domain_ = nullptr;
    int nextSlot_ = 0;
    std::vector<std::pair<int, int>> fixed_;
    std::vector<int> env_;
    CNode root_;
    std::map<std::string, std::vector<char>> flats_;
    Tuple scratch_;

    const std::vector<char>* flat_table(const std::string& sym, int arity) {
        auto it = flats_.find(sym);
        if (it != flats_.end()) return &it->second;
        size_t size = arity == 1 ? a_.n : static_cast<size_t>(a_.n) * a_.n;
        std::vector<char> table(size, 0);
        for (auto& t : a_.tuples(sym))
            table[arity == 1 ? t[0] : t[0] * a_.n + t[1]] = 1;
        return &(flats_[sym] = std::move(table));
    }

    CNode compile(const FormulaPtr& f,
                  std::map<std::string, std::vector<int>>& scopes) {
        CNode n;
        n.kind = f->kind;
        auto slot_of = [&](const std::string& v) {
            auto it = scopes.find(v);
            if (it == scopes.end() || it->second.empty())
                throw UnboundVariable("variable '" + v + "'");
            return it->second.back();
        };
        switch (f->kind) {
            case FKind::True:
            case FKind::False:
                break;
            case FKind::Eq:
                n.slots = {slot_of(f->vars[0]), slot_of(f->vars[1])};
                break;
            case FKind::Atom: {
                int arity = a_.sig.arity(f->sym);
                for (auto& v : f->vars) n.slots.push_back(slot_of(v));
                if (arity <= 2)
                    n.flat = flat_table(f->sym, arity);
                else
                    n.tset = &a_.tuples(f->sym);
                break;
            }
            case FKind::Forall:
            case FKind::Exists: {
                for (auto& v : f->vars) {
                    n.slots.push_back(nextSlot_);
                    scopes[v].push_back(nextSlot_++);
                }
                n.kids.push_back(compile(f->kids[0], scopes));
                for (auto& v : f->vars) scopes[v].pop_back();
                break;
            }
            default:
                for (auto& k : f->kids) n.kids.push_back(compile(k, scopes));
        }
        for (auto& k : n.kids)
            n.cost = std::min(n.cost + k.cost,
                              std::numeric_limits<long long>::max() / 64);
        if (n.kind == FKind::Forall || n.kind == FKind::Exists)
            for (size_t i = 0; i < n.slots.size() && n.cost < (1LL << 40); ++i)
                n.cost *= std::max(a_.n, 2);
        // Conjunction and disjunction are commutative and side-effect free;
        // trying cheap children first short-circuits past expensive ones.
        if (n.kind == FKind::And || n.kind == FKind::Or)
            std::stable_sort(
                n.kids.begin(), n.kids.end(),
                [](const CNode& x, const CNode& y) { return x.cost < y.cost; });
        return n;
    }

    bool run(const CNode& n) {
        switch (n.kind) {
            case FKind::True: return true;
            case FKind::False: return false;
            case FKind::Eq: return env_[n.slots[0]] == env_[n.slots[1]];
            case FKind::Atom:
                if (n.flat) {
                    size_t idx = env_[n.slots[0]];
                    if (n.slots.size() == 2)
                        idx = idx * a_.n + env_[n.slots[1]];
                    return (*n.flat)[idx] != 0;
                }
                scratch_.resize(n.slots.size());
                for (size_t i = 0; i < n.slots.size(); ++i)
                    scratch_[i] = env_[n.slots[i]];
                return n.tset->count(scratch_) > 0;
            case FKind::Not: return !run(n.kids[0]);
            case FKind::And:
                for (auto& k : n.kids)
                    if (!run(k)) return false;
                return true;
            case FKind::Or:
                for (auto& k : n.kids)
                    if (run(k)) return true;
                return false;
            case FKind::Implies:
                return !run(n.kids[0]) || run(n.kids[1]);
            case FKind::Iff:
                return run(n.kids[0]) == run(n.kids[1]);
            case FKind::Forall:
            case FKind::Exists:
                return quant(n, 0, n.kind == FKind::Forall);
        }
        return false;
    }

    bool quant(const CNode& n, size_t i, bool isForall) {
        if (i == n.slots.size()) return run(n.kids[0]);
        if (domain_) {
            for (int v : *domain_) {
                env_[n.slots[i]] = v;
                if (quant(n, i + 1, isForall) != isForall) return !isForall;
            }
            return isForall;
        }
        for (int v = 0; v < a_.n; ++v) {
            env_[n.slots[i]] = v;
            if (quant(n, i + 1, isForall) != isForall) return !isForall;
        }
        return isForall;
    }
};

}  // namespace

bool eval_fo(const FormulaPtr& phi, const Structure& a, const Env& env) {
    return Evaluator(phi, a, env).run();
}

bool is_universal(const FormulaPtr& phi) {
    FormulaPtr cur = phi;
    while (cur->kind == FKind::Forall) cur = cur->kids[0];
    std::vector<FormulaPtr> stack = {cur};
    while (!stack.empty()) {
        FormulaPtr g = stack.back();
        stack.pop_back();
        if (g->kind == FKind::Forall || g->kind == FKind::Exists) return false;
        for (auto& k : g->kids) stack.push_back(k);
    }
    return true;
}

namespace {

bool quantifier_free(const FormulaPtr& f) {
    if (f->kind == FKind::Forall || f->kind == FKind::Exists) return false;
    for (auto& k : f->kids)
        if (!quantifier_free(k)) return false;
    return true;
}

// True when satisfaction is preserved by induced substructures: in negation
// normal form the formula has universal quantifiers only.
bool downward_closed(const FormulaPtr& f, bool pos) {
    switch (f->kind) {
        case FKind::Forall:
            return pos && downward_closed(f->kids[0], pos);
        case FKind::Exists:
            return !pos && downward_closed(f->kids[0], pos);
        case FKind::Not:
            return downward_closed(f->kids[0], !pos);
        case FKind::Implies:
            return downward_closed(f->kids[0], !pos) &&
                   downward_closed(f->kids[1], pos);
        case FKind::Iff:
            return quantifier_free(f);
        default:
            for (auto& k : f->kids)
                if (!downward_closed(k, pos)) return false;
            return true;
    }
}

void flatten_and(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->kind == FKind::And) {
        for (auto& k : f->kids) flatten_and(k, out);
    } else {
        out.push_back(f);
    }
}

}  // namespace

HerVerdict her_check(const FormulaPtr& phi, const Structure& a) {
    HerVerdict v;
    if (downward_closed(phi, true)) {
        // Universal sentences are substructure-closed: check A alone.
        if (!eval_fo(phi, a)) {
            v.member = false;
            std::vector<int> full(a.n);
            for (int i = 0; i < a.n; ++i) full[i] = i;
            // Still report the minimum falsifying subset for diagnostics.
            enumerate_substructures(
                a, [&](const std::vector<int>& s, const Structure& b) {
                    if (!eval_fo(phi, b)) {
                        v.counterexample = s;
                        return false;
                    }
                    return true;
                });
            if (!v.counterexample) v.counterexample = full;
        }
        return v;
    }
    // Substructure-closed conjuncts that hold on A hold on every substructure,
    // so only the remaining conjuncts need to be re-evaluated per subset.
    // Verdict and minimal counterexample agree with the unsplit evaluation.
    FormulaPtr probe = phi;
    if (phi->kind == FKind::And) {
        std::vector<FormulaPtr> flat, uni, rest;
        flatten_and(phi, flat);
        for (auto& k : flat)
            (downward_closed(k, true) ? uni : rest).push_back(k);
        if (!uni.empty() && eval_fo(f_and(uni), a)) probe = f_and(rest);
    }
    // Compile once against the full structure and relativize quantifiers to
    // each subset; order matches enumerate_substructures (size, then lex).
    Evaluator ev(probe, a, {});
    for (int k = 1; k <= a.n; ++k) {
        std::vector<int> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            if (!ev.run_restricted(idx)) {
                v.member = false;
                v.counterexample = idx;
                return v;
            }
            int i = k - 1;
            while (i >= 0 && idx[i] == a.n - k + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return v;
}

}  // namespace eso
