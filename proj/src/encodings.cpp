#include "eso/encodings.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "eso/eval.hpp"
#include "eso/xform.hpp"

namespace eso {

namespace {

std::vector<std::string> var_pool(int n) {
    std::vector<std::string> vs;
    for (int i = 0; i < n; ++i) vs.push_back("x" + std::to_string(i));
    return vs;
}

using LitMaker =
    std::function<FormulaPtr(const std::string&, std::vector<std::string>)>;

// Universal clause forbidding an induced copy of f: variables collide, or
// some present tuple gets the `present` literal, or some absent tuple (over
// distinct coordinates) gets the `absent` literal.
FormulaPtr forbid_induced(const Structure& f, const LitMaker& present,
                          const LitMaker& absent) {
    std::vector<std::string> vs = var_pool(f.n);
    std::vector<FormulaPtr> lits;
    for (int i = 0; i < f.n; ++i)
        for (int j = i + 1; j < f.n; ++j) lits.push_back(f_eq(vs[i], vs[j]));
    for (auto& [sym, arity] : f.sig.symbols)
        for (auto& t : all_tuples(f.n, arity)) {
            std::vector<std::string> args;
            for (int e : t) args.push_back(vs[e]);
            lits.push_back(f.has_tuple(sym, t) ? present(sym, args)
                                               : absent(sym, args));
        }
    return f_forall(vs, f_or(std::move(lits)));
}

void require_single_binary(const std::vector<Structure>& fam,
                           const char* what) {
    for (auto& f : fam)
        if (f.sig.symbols.size() != 1 || f.sig.symbols[0].second != 2)
            throw BadParams(std::string(what) +
                            " must use a single binary relation symbol");
}

bool symmetric_loopless(const Structure& g, const std::string& sym) {
    for (auto& t : g.tuples(sym))
        if (t[0] == t[1] || !g.has_tuple(sym, {t[1], t[0]})) return false;
    return true;
}

bool oriented(const Structure& g, const std::string& sym) {
    for (auto& t : g.tuples(sym))
        if (t[0] == t[1] || g.has_tuple(sym, {t[1], t[0]})) return false;
    return true;
}

}  // namespace

EsoSentence encode_dag() {
    Signature tau;
    tau.add("E", 2);
    auto lt = [](const std::string& a, const std::string& b) {
        return f_atom("<", {a, b});
    };
    FormulaPtr matrix = f_forall(
        {"x", "y", "z"},
        f_and({f_implies(f_atom("E", {"x", "y"}), lt("x", "y")),
               f_not(lt("x", "x")),
               f_implies(f_and({lt("x", "y"), lt("y", "z")}), lt("x", "z")),
               f_or({lt("x", "y"), lt("y", "x"), f_eq("x", "y")})}));
    return EsoSentence{tau, {EsoDecl{"<", 2, "E"}}, matrix};
}

EsoSentence encode_precol3() {
    Signature tau;
    tau.add("E", 2);
    tau.add("R'", 1);
    tau.add("G'", 1);
    tau.add("B'", 1);
    std::vector<FormulaPtr> cs;
    for (std::string c : {"R", "G", "B"})
        cs.push_back(f_implies(f_atom(c + "'", {"x"}), f_atom(c, {"x"})));
    std::vector<FormulaPtr> mono;
    for (std::string c : {"R", "G", "B"})
        mono.push_back(
            f_not(f_and({f_atom(c, {"x"}), f_atom(c, {"y"})})));
    cs.push_back(f_implies(f_atom("E", {"x", "y"}), f_and(std::move(mono))));
    cs.push_back(
        f_or({f_atom("R", {"x"}), f_atom("G", {"x"}), f_atom("B", {"x"})}));
    FormulaPtr matrix = f_forall({"x", "y"}, f_and(std::move(cs)));
    return EsoSentence{tau,
                       {EsoDecl{"R", 1, "R'"}, EsoDecl{"G", 1, "G'"},
                        EsoDecl{"B", 1, "B'"}},
                       matrix};
}

EsoSentence encode_kcolor(int k) {
    if (k < 1) throw BadParams("kcolor needs k >= 1");
    Signature tau;
    tau.add("E", 2);
    auto e1 = [](const std::string& a, const std::string& b) {
        return f_atom("E1", {a, b});
    };
    std::vector<std::string> vs = var_pool(std::max(3, k + 1));
    std::vector<FormulaPtr> cs;
    cs.push_back(f_implies(f_atom("E", {vs[0], vs[1]}), e1(vs[0], vs[1])));
    cs.push_back(f_not(e1(vs[0], vs[0])));
    cs.push_back(f_implies(e1(vs[0], vs[1]), e1(vs[1], vs[0])));
    // No induced isolated-vertex-plus-edge: a complete multipartite graph.
    cs.push_back(f_implies(e1(vs[0], vs[1]),
                           f_or({e1(vs[0], vs[2]), e1(vs[1], vs[2])})));
    // No clique on k+1 vertices: at most k parts.
    std::vector<FormulaPtr> anti;
    for (int i = 0; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j)
            anti.push_back(f_not(e1(vs[i], vs[j])));
    cs.push_back(f_or(std::move(anti)));
    return EsoSentence{tau,
                       {EsoDecl{"E1", 2, "E"}},
                       f_forall(vs, f_and(std::move(cs)))};
}

EsoSentence encode_sandwich(const std::vector<Structure>& forbidden) {
    require_single_binary(forbidden, "sandwich bounds");
    for (auto& f : forbidden)
        if (!symmetric_loopless(f, f.sig.symbols[0].first))
            throw BadParams("sandwich bounds must be symmetric and loopless");
    Signature tau;
    tau.add("E", 2);
    tau.add("N", 2);
    auto ep = [](const std::string& a, const std::string& b) {
        return f_atom("E'", {a, b});
    };
    auto np = [](const std::string& a, const std::string& b) {
        return f_atom("N'", {a, b});
    };
    std::vector<FormulaPtr> cs;
    cs.push_back(f_forall(
        {"x", "y"},
        f_and({f_implies(f_atom("E", {"x", "y"}), ep("x", "y")),
               f_implies(f_atom("N", {"x", "y"}), np("x", "y")),
               f_iff(np("x", "y"), f_not(ep("x", "y"))),
               // graph axioms with non-edges spelled through N'
               np("x", "x"), f_or({np("x", "y"), ep("y", "x")})})));
    for (auto& f : forbidden)
        cs.push_back(forbid_induced(
            f,
            [&](const std::string&, std::vector<std::string> a) {
                return f_atom("N'", std::move(a));
            },
            [&](const std::string&, std::vector<std::string> a) {
                return f_atom("E'", std::move(a));
            }));
    return EsoSentence{tau,
                       {EsoDecl{"E'", 2, "E"}, EsoDecl{"N'", 2, "N"}},
                       f_and(std::move(cs))};
}

EsoSentence encode_orient(const std::vector<Structure>& forbidden) {
    require_single_binary(forbidden, "orientation bounds");
    for (auto& f : forbidden)
        if (!oriented(f, f.sig.symbols[0].first))
            throw BadParams("orientation bounds must be oriented graphs");
    Signature tau;
    tau.add("E", 2);
    tau.add("A'", 2);
    auto arc = [](const std::string& a, const std::string& b) {
        return f_atom("A", {a, b});
    };
    std::vector<FormulaPtr> cs;
    cs.push_back(f_forall(
        {"x", "y"},
        f_and({f_implies(f_atom("A'", {"x", "y"}), arc("x", "y")),
               f_iff(f_or({arc("x", "y"), arc("y", "x")}),
                     f_atom("E", {"x", "y"})),
               f_not(arc("x", "x")),
               f_not(f_and({arc("x", "y"), arc("y", "x")}))})));
    for (auto& f : forbidden)
        cs.push_back(forbid_induced(
            f,
            [&](const std::string&, std::vector<std::string> a) {
                return f_not(f_atom("A", std::move(a)));
            },
            [&](const std::string&, std::vector<std::string> a) {
                return f_atom("A", std::move(a));
            }));
    return EsoSentence{tau, {EsoDecl{"A", 2, "A'"}}, f_and(std::move(cs))};
}

namespace {

// Replace successor atoms s(a,b) by "a < b and nothing lies between".
FormulaPtr expand_successor(const FormulaPtr& f) {
    if (f->kind == FKind::Atom && f->sym == "s") {
        const std::string& a = f->vars[0];
        const std::string& b = f->vars[1];
        std::string z = "z";
        while (z == a || z == b) z += "'";
        return f_and(
            {f_atom("<", {a, b}),
             f_forall({z},
                      f_implies(f_and({f_atom("<", {a, z}),
                                       f_atom("<", {z, b})}),
                                f_or({f_eq(z, a), f_eq(z, b)})))});
    }
    auto g = std::make_shared<Formula>(*f);
    for (auto& k : g->kids) k = expand_successor(k);
    return g;
}

void check_cts_symbols(const FormulaPtr& f,
                       const std::map<std::string, int>& allowed) {
    if (f->kind == FKind::Atom) {
        auto it = allowed.find(f->sym);
        if (it == allowed.end() ||
            it->second != static_cast<int>(f->vars.size()))
            throw NonOrderSignature("symbol " + f->sym +
                                    " is not a letter, '<', or 's'");
    }
    for (auto& k : f->kids) check_cts_symbols(k, allowed);
}

}  // namespace

EsoSentence encode_cts(const FormulaPtr& phi,
                       const std::vector<std::string>& alphabet) {
    if (alphabet.empty()) throw BadParams("cts needs a nonempty alphabet");
    std::set<std::string> seen;
    for (auto& a : alphabet)
        if (!valid_symbol_name(a) || a == "E" || a == "<" || a == "s" ||
            !seen.insert(a).second)
            throw BadParams("bad alphabet letter " + a);
    std::map<std::string, int> allowed;
    for (auto& a : alphabet) allowed[a] = 1;
    allowed["<"] = 2;
    allowed["s"] = 2;
    check_cts_symbols(phi, allowed);

    Signature tau;
    for (auto& a : alphabet) tau.add(a, 1);
    tau.add("E", 2);
    auto lt = [](const std::string& a, const std::string& b) {
        return f_atom("<", {a, b});
    };
    std::vector<FormulaPtr> labels, excls;
    for (auto& a : alphabet) labels.push_back(f_atom(a, {"x"}));
    for (size_t i = 0; i < alphabet.size(); ++i)
        for (size_t j = i + 1; j < alphabet.size(); ++j)
            excls.push_back(f_not(f_and({f_atom(alphabet[i], {"x"}),
                                         f_atom(alphabet[j], {"x"})})));
    std::vector<FormulaPtr> cs = {
        f_forall({"x", "y"},
                 f_implies(f_atom("E", {"x", "y"}), lt("x", "y"))),
        f_forall({"x", "y", "z"},
                 f_and({f_not(lt("x", "x")),
                        f_implies(f_and({lt("x", "y"), lt("y", "z")}),
                                  lt("x", "z")),
                        f_or({lt("x", "y"), lt("y", "x"), f_eq("x", "y")})})),
        // every vertex carries exactly one letter
        f_forall({"x"}, f_and({f_or(std::move(labels)),
                               f_and(std::move(excls))})),
        expand_successor(phi)};
    return EsoSentence{tau, {EsoDecl{"<", 2, "E"}}, f_and(std::move(cs))};
}

EsoSentence encode_csp_full(const Structure& b) {
    std::vector<FormulaPtr> cs;
    for (auto& f : full_csp_bounds(b))
        cs.push_back(forbid_induced(
            f,
            [&](const std::string& sym, std::vector<std::string> a) {
                return f_not(f_atom(sym, std::move(a)));
            },
            [&](const std::string& sym, std::vector<std::string> a) {
                return f_atom(sym, std::move(a));
            }));
    return EsoSentence{b.sig, {}, f_and(std::move(cs))};
}

namespace {

std::map<std::string, std::string> primed_names(const Signature& sig) {
    std::map<std::string, std::string> primed;
    std::set<std::string> used;
    for (auto& [sym, arity] : sig.symbols) used.insert(sym);
    for (auto& [sym, arity] : sig.symbols) {
        std::string cand = sym + "'";
        while (used.count(cand)) cand += "'";
        used.insert(cand);
        primed[sym] = cand;
    }
    return primed;
}

FormulaPtr rename_syms(const FormulaPtr& f,
                       const std::map<std::string, std::string>& ren) {
    auto g = std::make_shared<Formula>(*f);
    if (g->kind == FKind::Atom) {
        auto it = ren.find(g->sym);
        if (it != ren.end()) g->sym = it->second;
    }
    for (auto& k : g->kids) k = rename_syms(k, ren);
    return g;
}

}  // namespace

EsoSentence encode_csp(const Structure& b) {
    auto primed = primed_names(b.sig);
    std::vector<FormulaPtr> cs;
    std::vector<EsoDecl> decls;
    for (auto& [sym, arity] : b.sig.symbols) {
        std::vector<std::string> vs = var_pool(std::max(1, arity));
        vs.resize(arity > 0 ? arity : 1);
        std::vector<std::string> args(vs.begin(), vs.begin() + arity);
        cs.push_back(f_forall(
            vs, f_implies(f_atom(sym, args), f_atom(primed[sym], args))));
        decls.push_back(EsoDecl{primed[sym], arity, sym});
    }
    cs.push_back(rename_syms(encode_csp_full(b).matrix, primed));
    return EsoSentence{b.sig, decls, f_and(std::move(cs))};
}

EsoSentence encode_surj_csp(const Structure& b) {
    EsoSentence base = encode_csp(b);
    auto primed = primed_names(b.sig);
    std::vector<std::string> ys;
    for (int i = 0; i < b.n; ++i) ys.push_back("y" + std::to_string(i));
    std::vector<FormulaPtr> diag;
    for (auto& [sym, arity] : b.sig.symbols)
        for (auto& t : all_tuples(b.n, arity)) {
            std::vector<std::string> args;
            for (int e : t) args.push_back(ys[e]);
            FormulaPtr atom = f_atom(primed[sym], args);
            diag.push_back(b.has_tuple(sym, t) ? atom : f_not(atom));
        }
    for (int i = 0; i < b.n; ++i)
        for (int j = i + 1; j < b.n; ++j)
            diag.push_back(f_not(f_eq(ys[i], ys[j])));
    return EsoSentence{
        base.inputSig, base.existentials,
        f_and({base.matrix, f_exists(ys, f_and(std::move(diag)))})};
}

EsoSentence encode_gi() {
    Signature tau;
    tau.add("U1", 1);
    tau.add("U2", 1);
    tau.add("E", 2);
    tau.add("I'", 2);
    auto I = [](const std::string& a, const std::string& b) {
        return f_atom("I", {a, b});
    };
    auto E = [](const std::string& a, const std::string& b) {
        return f_atom("E", {a, b});
    };
    std::vector<FormulaPtr> cs = {
        f_forall({"x", "y"},
                 f_implies(f_atom("I'", {"x", "y"}), I("x", "y"))),
        f_forall({"x", "y"},
                 f_implies(I("x", "y"), f_and({f_atom("U1", {"x"}),
                                               f_atom("U2", {"y"})}))),
        f_forall({"x", "y", "z"},
                 f_and({f_implies(f_and({I("x", "y"), I("x", "z")}),
                                  f_eq("y", "z")),
                        f_implies(f_and({I("x", "z"), I("y", "z")}),
                                  f_eq("x", "y"))})),
        f_forall({"x"},
                 f_exists({"y"},
                          f_and({f_implies(f_atom("U1", {"x"}), I("x", "y")),
                                 f_implies(f_atom("U2", {"x"}),
                                           I("y", "x"))}))),
        f_forall({"x1", "y1", "x2", "y2"},
                 f_implies(f_and({I("x1", "x2"), I("y1", "y2")}),
                           f_iff(E("x1", "y1"), E("x2", "y2")))),
        f_forall({"x"}, f_not(f_and({f_atom("U1", {"x"}),
                                     f_atom("U2", {"x"})}))),
        f_forall({"x", "y"},
                 f_and({f_not(E("x", "x")),
                        f_implies(E("x", "y"), E("y", "x")),
                        f_implies(E("x", "y"),
                                  f_or({f_and({f_atom("U1", {"x"}),
                                               f_atom("U1", {"y"})}),
                                        f_and({f_atom("U2", {"x"}),
                                               f_atom("U2", {"y"})})}))}))};
    return EsoSentence{tau, {EsoDecl{"I", 2, "I'"}}, f_and(std::move(cs))};
}

namespace {

FormulaPtr equiv_axioms(const std::string& r) {
    auto R = [&](const std::string& a, const std::string& b) {
        return f_atom(r, {a, b});
    };
    return f_forall(
        {"x", "y", "z"},
        f_and({R("x", "x"), f_implies(R("x", "y"), R("y", "x")),
               f_implies(f_and({R("x", "y"), R("y", "z")}), R("x", "z"))}));
}

FormulaPtr mdual_rho() {
    auto Uf = [](const std::string& v) { return f_atom("Uf", {v}); };
    auto Ug = [](const std::string& v) { return f_atom("Ug", {v}); };
    return f_and(
        {f_forall({"x"}, f_and({f_or({Uf("x"), Ug("x")}),
                                f_not(f_and({Uf("x"), Ug("x")}))})),
         f_forall({"x", "y"},
                  f_implies(f_atom("C", {"x", "y"}),
                            f_or({f_and({Uf("x"), Uf("y")}),
                                  f_and({Ug("x"), Ug("y")})}))),
         f_forall({"x"},
                  f_implies(Uf("x"),
                            f_exists({"y"}, f_and({Ug("y"),
                                                   f_atom("EQ",
                                                          {"x", "y"})})))),
         f_forall({"x"},
                  f_implies(Ug("x"),
                            f_exists({"y"}, f_and({Uf("y"),
                                                   f_atom("EQ",
                                                          {"x", "y"})}))))});
}

// Conjunctive-side truth on the part flagged by `part`: every clause vertex
// shares a clause with a true vertex.
FormulaPtr mdual_true_c(const std::string& part) {
    return f_forall(
        {"x"},
        f_implies(f_atom(part, {"x"}),
                  f_exists({"y"}, f_and({f_atom("C", {"x", "y"}),
                                         f_atom(part, {"y"}),
                                         f_atom("U1", {"y"})}))));
}

// Disjunctive-side truth: some clause is true everywhere.
FormulaPtr mdual_true_d(const std::string& part) {
    return f_exists(
        {"x"},
        f_and({f_atom(part, {"x"}),
               f_forall({"y"}, f_implies(f_and({f_atom("C", {"x", "y"}),
                                                f_atom(part, {"y"})}),
                                         f_atom("U1", {"y"})))}));
}

}  // namespace

EsoSentence encode_mdual() {
    Signature tau;
    tau.add("U1'", 1);
    tau.add("Uf", 1);
    tau.add("Ug", 1);
    tau.add("C", 2);
    tau.add("EQ", 2);
    FormulaPtr ext = f_forall(
        {"x"}, f_implies(f_atom("U1'", {"x"}), f_atom("U1", {"x"})));
    FormulaPtr delta = f_and(
        {equiv_axioms("C"), equiv_axioms("EQ"),
         f_forall({"x", "y"},
                  f_implies(f_atom("EQ", {"x", "y"}),
                            f_iff(f_atom("U1", {"x"}),
                                  f_atom("U1", {"y"}))))});
    FormulaPtr tdf = mdual_true_d("Uf");
    FormulaPtr tcg = mdual_true_c("Ug");
    FormulaPtr xorPart = f_or({f_and({tdf, f_not(tcg)}),
                               f_and({f_not(tdf), tcg})});
    return EsoSentence{tau,
                       {EsoDecl{"U1", 1, "U1'"}},
                       f_and({ext, mdual_rho(), delta, xorPart})};
}

Structure henson(int n) {
    if (n < 5) throw BadParams("henson tournaments start at n = 5");
    Signature sig;
    sig.add("E", 2);
    Structure t(sig, n);
    t.add_tuple("E", {0, n - 1});
    for (int i = 0; i + 1 < n; ++i) t.add_tuple("E", {i, i + 1});
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j)
            if (!(j == n - 1 && i == 0)) t.add_tuple("E", {j, i});
    return t;
}

// ---------------------------------------------------------------------------
// Graph isomorphism completion instances

namespace {

bool graph_over_e(const Structure& g) {
    return g.sig.symbols.size() == 1 && g.sig.symbols[0].first == "E" &&
           g.sig.symbols[0].second == 2 && symmetric_loopless(g, "E");
}

Structure gi_no_structure() {
    Signature tau = encode_gi().inputSig;
    Structure a(tau, 1);
    a.add_tuple("U1", {0});
    return a;
}

GiInstance gi_no_instance() {
    Signature gsig;
    gsig.add("E", 2);
    Structure g(gsig, 2), h(gsig, 2);
    g.add_tuple("E", {0, 1});
    g.add_tuple("E", {1, 0});
    return GiInstance{g, h, {}};
}

bool valid_partial(const GiInstance& inst) {
    std::map<int, int> fwd, bwd;
    for (auto& [u, v] : inst.partial) {
        if (u < 0 || u >= inst.g.n || v < 0 || v >= inst.h.n) return false;
        if (fwd.count(u) && fwd[u] != v) return false;
        if (bwd.count(v) && bwd[v] != u) return false;
        fwd[u] = v;
        bwd[v] = u;
    }
    for (auto& [u, v] : fwd)
        for (auto& [u2, v2] : fwd)
            if (inst.g.has_tuple("E", {u, u2}) !=
                inst.h.has_tuple("E", {v, v2}))
                return false;
    return true;
}

}  // namespace

Structure build_gi_instance(const GiInstance& inst) {
    if (!graph_over_e(inst.g) || !graph_over_e(inst.h) ||
        !valid_partial(inst))
        return gi_no_structure();
    Signature tau = encode_gi().inputSig;
    Structure a(tau, inst.g.n + inst.h.n);
    for (int v = 0; v < inst.g.n; ++v) a.add_tuple("U1", {v});
    for (int v = 0; v < inst.h.n; ++v) a.add_tuple("U2", {inst.g.n + v});
    for (auto& t : inst.g.tuples("E")) a.add_tuple("E", t);
    for (auto& t : inst.h.tuples("E"))
        a.add_tuple("E", {inst.g.n + t[0], inst.g.n + t[1]});
    for (auto& [u, v] : inst.partial) a.add_tuple("I'", {u, inst.g.n + v});
    return a;
}

GiInstance reverse_gi(const Structure& a) {
    Signature tau = encode_gi().inputSig;
    if (!(a.sig == tau))
        throw SignatureMismatch("not a graph-isomorphism instance structure");
    std::vector<int> side(a.n, -1);  // 0 = U1, 1 = U2
    for (auto& t : a.tuples("U1")) side[t[0]] = 0;
    for (auto& t : a.tuples("U2")) {
        if (side[t[0]] == 0) return gi_no_instance();  // overlap
        side[t[0]] = 1;
    }
    // Unflagged vertices with incident tuples make the sentence false.
    for (std::string sym : {"E", "I'"})
        for (auto& t : a.tuples(sym))
            if (side[t[0]] < 0 || side[t[1]] < 0) return gi_no_instance();
    std::vector<int> u1, u2;
    std::vector<int> local(a.n, -1);
    for (int v = 0; v < a.n; ++v) {
        if (side[v] == 0) {
            local[v] = static_cast<int>(u1.size());
            u1.push_back(v);
        } else if (side[v] == 1) {
            local[v] = static_cast<int>(u2.size());
            u2.push_back(v);
        }
    }
    // A part left empty while the other is flagged cannot be matched; with
    // both parts empty the structure is trivially accepted.
    if (u1.empty() != u2.empty()) return gi_no_instance();
    Signature gsig;
    gsig.add("E", 2);
    Structure g(gsig, std::max<int>(1, u1.size()));
    Structure h(gsig, std::max<int>(1, u2.size()));
    for (auto& t : a.tuples("E")) {
        if (side[t[0]] != side[t[1]]) return gi_no_instance();
        if (t[0] == t[1]) return gi_no_instance();
        if (!a.has_tuple("E", {t[1], t[0]})) return gi_no_instance();
        (side[t[0]] == 0 ? g : h)
            .add_tuple("E", {local[t[0]], local[t[1]]});
    }
    GiInstance inst{g, h, {}};
    for (auto& t : a.tuples("I'")) {
        if (side[t[0]] != 0 || side[t[1]] != 1) return gi_no_instance();
        inst.partial.emplace_back(local[t[0]], local[t[1]]);
    }
    if (!valid_partial(inst)) return gi_no_instance();
    return inst;
}

// ---------------------------------------------------------------------------
// Monotone dualization instances

namespace {

void check_cnf(const MonotoneCnf& f) {
    if (f.varCount < 1) throw BadParams("formula needs at least one variable");
    for (auto& c : f.clauses) {
        if (c.empty()) throw BadParams("empty clause");
        for (int v : c)
            if (v < 0 || v >= f.varCount)
                throw BadParams("variable index out of range");
    }
}

bool covers_all_vars(const MonotoneCnf& f) {
    std::set<int> seen;
    for (auto& c : f.clauses) seen.insert(c.begin(), c.end());
    return static_cast<int>(seen.size()) == f.varCount;
}

std::pair<MonotoneCnf, MonotoneCnf> mdual_fixed_pair() {
    MonotoneCnf orClause{2, {{0, 1}}};
    return {orClause, orClause};  // (x or y) is not its own dual
}

}  // namespace

Structure build_mdual_instance(const MonotoneCnf& phi,
                               const MonotoneCnf& psi) {
    check_cnf(phi);
    check_cnf(psi);
    if (phi.varCount != psi.varCount || !covers_all_vars(phi) ||
        !covers_all_vars(psi))
        throw VariableMismatch(
            "both formulas must use exactly the same variables");
    Signature tau = encode_mdual().inputSig;
    std::vector<std::pair<int, int>> occ;  // (variable, clause id)
    std::vector<int> part;                 // 0 = phi, 1 = psi
    int clauseId = 0;
    for (int side = 0; side < 2; ++side) {
        const MonotoneCnf& f = side == 0 ? phi : psi;
        for (auto& c : f.clauses) {
            for (int v : c) {
                occ.emplace_back(v, clauseId);
                part.push_back(side);
            }
            ++clauseId;
        }
    }
    Structure a(tau, static_cast<int>(occ.size()));
    for (size_t i = 0; i < occ.size(); ++i) {
        a.add_tuple(part[i] == 0 ? "Uf" : "Ug", {static_cast<int>(i)});
        for (size_t j = 0; j < occ.size(); ++j) {
            if (occ[i].second == occ[j].second)
                a.add_tuple("C", {static_cast<int>(i), static_cast<int>(j)});
            if (occ[i].first == occ[j].first)
                a.add_tuple("EQ", {static_cast<int>(i), static_cast<int>(j)});
        }
    }
    return a;
}

std::pair<MonotoneCnf, MonotoneCnf> reverse_mdual(const Structure& a) {
    Signature tau = encode_mdual().inputSig;
    if (!(a.sig == tau))
        throw SignatureMismatch("not a monotone-dualization structure");
    FormulaPtr shape = f_and({equiv_axioms("C"), equiv_axioms("EQ"),
                              mdual_rho()});
    if (!eval_fo(shape, a)) return mdual_fixed_pair();

    // Variables are EQ-classes, ordered by least member.
    std::vector<int> varOf(a.n, -1);
    int varCount = 0;
    for (int v = 0; v < a.n; ++v) {
        if (varOf[v] >= 0) continue;
        for (auto& t : a.tuples("EQ"))
            if (t[0] == v) varOf[t[1]] = varCount;
        varOf[v] = varCount++;
    }
    MonotoneCnf phi{varCount, {}}, psi{varCount, {}};
    std::vector<char> seen(a.n, 0);
    for (int v = 0; v < a.n; ++v) {
        if (seen[v]) continue;
        std::set<int> vars;
        bool hasPrimed = false;
        bool inF = a.has_tuple("Uf", {v});
        for (auto& t : a.tuples("C"))
            if (t[0] == v) {
                seen[t[1]] = 1;
                vars.insert(varOf[t[1]]);
                if (a.has_tuple("U1'", {t[1]})) hasPrimed = true;
            }
        if (hasPrimed) continue;  // forced-true clause: drop it
        (inF ? phi : psi).clauses.push_back(std::move(vars));
    }
    return {phi, psi};
}

}  // namespace eso
