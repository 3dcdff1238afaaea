#include "eso/xform.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "eso/eval.hpp"
#include "eso/solver.hpp"

namespace eso {

namespace {

// A symbol name not yet used in sig, starting from base (alt is used when the
// base itself cannot take a digit suffix, e.g. "<").
std::string fresh_name(const std::string& base, const Signature& sig,
                       const std::string& alt) {
    if (valid_symbol_name(base) && !sig.has(base)) return base;
    std::string stem = (valid_symbol_name(alt) && alt != "<") ? alt : base;
    if (!sig.has(stem) && stem != base && valid_symbol_name(stem)) return stem;
    // a stem that can't take numeric suffixes would loop forever below
    if (!valid_symbol_name(stem + "1")) stem = "R";
    for (int i = 1;; ++i) {
        std::string cand = stem + std::to_string(i);
        if (valid_symbol_name(cand) && !sig.has(cand)) return cand;
    }
}

FormulaPtr literal_formula(const Literal& l) {
    FormulaPtr f =
        l.isEq ? f_eq(l.vars[0], l.vars[1]) : f_atom(l.sym, l.vars);
    return l.neg ? f_not(f) : f;
}

FormulaPtr clause_formula(const std::vector<Literal>& clause) {
    std::vector<FormulaPtr> lits;
    for (auto& l : clause) lits.push_back(literal_formula(l));
    return f_or(std::move(lits));
}

// Negation of a prenex formula, still in prenex form.
FormulaPtr negate_prenex(const FormulaPtr& phi) {
    if (phi->kind == FKind::Forall)
        return f_exists(phi->vars, negate_prenex(phi->kids[0]));
    if (phi->kind == FKind::Exists)
        return f_forall(phi->vars, negate_prenex(phi->kids[0]));
    return f_not(phi);
}

void collect_var_names(const FormulaPtr& f, std::set<std::string>& out) {
    for (auto& v : f->vars) out.insert(v);
    for (auto& k : f->kids) collect_var_names(k, out);
}

using Pairs = std::vector<std::pair<std::string, std::string>>;

bool is_extension_clause(const std::vector<Literal>& clause,
                         const Pairs& pairs) {
    if (clause.size() != 2) return false;
    const Literal* negL = nullptr;
    const Literal* posL = nullptr;
    for (auto& l : clause) {
        if (l.isEq) return false;
        if (l.neg) negL = &l;
        else posL = &l;
    }
    if (!negL || !posL || negL->vars != posL->vars) return false;
    for (auto& [ex, primed] : pairs)
        if (negL->sym == primed && posL->sym == ex) return true;
    return false;
}

bool is_emptiness_guard(const std::vector<Literal>& clause,
                        const Pairs& pairs) {
    if (clause.size() != 1 || clause[0].isEq || !clause[0].neg) return false;
    for (auto& [ex, primed] : pairs)
        if (clause[0].sym == primed) return true;
    return false;
}

// The strict shape used by the reduction proofs: primed symbols may occur
// only in their extension clause, never in emptiness guards.
void require_strict_extensional(const EsoSentence& psi, const Pairs& pairs) {
    PrenexCnf p = to_pcnf(psi.matrix);
    for (auto& clause : p.clauses)
        if (is_emptiness_guard(clause, pairs))
            throw NotExtensional("primed symbol " + clause[0].sym +
                                 " occurs in an emptiness guard; the "
                                 "reduction requires it only in the "
                                 "extension clause");
}

void check_sig(const Structure& a, const Signature& sig) {
    if (!(a.sig == sig))
        throw SignatureMismatch(
            "structure signature differs from the transform's signature");
}

// Probe small structures for one accepted and one rejected instance.
std::pair<Structure, Structure> probe_yes_no(const EsoSentence& psi) {
    std::optional<Structure> yes, no;
    bool capped = false;
    for (int maxN = 1; maxN <= 4 && !(yes && no); ++maxN) {
        try {
            enumerate_structures(psi.inputSig, maxN, false,
                                 [&](const Structure& s) {
                                     if (decide_ext_eso(psi, s).accepted) {
                                         if (!yes) yes = s;
                                     } else if (!no) {
                                         no = s;
                                     }
                                     return !(yes && no);
                                 });
        } catch (const CapExceeded&) {
            capped = true;
            break;
        }
    }
    if (yes && no) return {*yes, *no};
    if (capped)
        throw ProbeExhausted(
            "no accepted/rejected instance pair within the probe budget");
    throw TrivialSentence(std::string("sentence is ") +
                          (yes ? "satisfied" : "falsified") +
                          " by every structure up to the probe size");
}

}  // namespace

// ---------------------------------------------------------------------------
// Hereditary FO -> monadic extension problem

Reduction herfo_to_exteso(const FormulaPtr& phi, const Signature& tau) {
    if (!is_prenex(phi)) throw NotPrenex("input formula must be prenex");
    if (!free_vars(phi).empty())
        throw BadParams("input formula must be a sentence");
    if (tau.has("S") || tau.has("Sbar"))
        throw SymbolClash("input signature already uses S or Sbar");

    Signature inSig = tau;
    inSig.add("S", 1);

    // Some superset Sbar of S misses part of the domain, and the substructure
    // induced on the complement of Sbar falsifies phi.
    FormulaPtr relativized =
        relativize(negate_prenex(phi), f_not(f_atom("Sbar", {"w"})));
    FormulaPtr matrix = f_and(
        {f_forall({"y"},
                  f_implies(f_atom("S", {"y"}), f_atom("Sbar", {"y"}))),
         f_exists({"w"}, f_not(f_atom("Sbar", {"w"}))), relativized});

    Reduction r;
    r.outSentence = EsoSentence{inSig, {EsoDecl{"Sbar", 1, "S"}}, matrix};
    r.polarity = Polarity::Complemented;
    r.forward = [tau, inSig](const Structure& a) {
        check_sig(a, tau);
        Structure b(inSig, a.n);
        for (auto& [sym, ts] : a.rels) b.rels[sym] = ts;
        return b;
    };
    EsoSentence out = *r.outSentence;
    r.reverse = [tau, inSig, out, phi](const Structure& b) {
        check_sig(b, inSig);
        std::vector<int> keep;
        for (int v = 0; v < b.n; ++v)
            if (!b.has_tuple("S", {v})) keep.push_back(v);
        if (!keep.empty()) {
            Structure sub = substructure(b, keep);
            Structure a(tau, sub.n);
            for (auto& [sym, arity] : tau.symbols)
                a.rels[sym] = sub.tuples(sym);
            return a;
        }
        // S covers the whole domain; emit a fixed instance whose hereditary
        // status matches the sentence's verdict here.
        bool val = decide_ext_eso(out, b).accepted;
        std::optional<Structure> fixed;
        try {
            enumerate_structures(tau, 4, false, [&](const Structure& s) {
                if (her_check(phi, s).member == !val) {
                    fixed = s;
                    return false;
                }
                return true;
            });
        } catch (const CapExceeded&) {
        }
        if (!fixed)
            throw ProbeExhausted(
                "no fixed instance of matching hereditary status found");
        return *fixed;
    };
    return r;
}

// ---------------------------------------------------------------------------
// Extension problem -> hereditary FO via the marker gadget

namespace {

// Replace every atom of a symbol in repl by "no marker tuple extends it".
FormulaPtr replace_by_markers(const FormulaPtr& f,
                              const std::map<std::string, std::string>& repl,
                              const std::string& zvar) {
    if (f->kind == FKind::Atom) {
        auto it = repl.find(f->sym);
        if (it == repl.end()) return f;
        std::vector<std::string> args = f->vars;
        args.push_back(zvar);
        return f_forall({zvar}, f_not(f_atom(it->second, args)));
    }
    auto g = std::make_shared<Formula>(*f);
    for (auto& k : g->kids) k = replace_by_markers(k, repl, zvar);
    return g;
}

struct Gadget {
    Signature rho;
    std::string symD, symE, symL;       // domain flag, cycle, order
    std::vector<std::string> symS;      // one marker symbol per existential
    FormulaPtr phi1, phi2, phi34, phi5, phi6;
    FormulaPtr formula;                  // (phi1 or phi2) and the rest
    FormulaPtr universalPart;            // phi3 and phi4 and phi5 and phi6
};

Gadget build_gadget(const EsoSentence& psi) {
    Gadget g;
    Signature used = psi.full_signature();
    g.symD = fresh_name("D", used, "Dom");
    used.add(g.symD, 1);
    g.symE = fresh_name("E", used, "Cyc");
    used.add(g.symE, 2);
    g.symL = fresh_name("<", used, "lt");
    used.add(g.symL, 2);
    for (size_t i = 0; i < psi.existentials.size(); ++i) {
        std::string base = "S_" + psi.existentials[i].name;
        if (!valid_symbol_name(base)) base = "S_" + std::to_string(i + 1);
        std::string name = fresh_name(base, used, "S_" + std::to_string(i + 1));
        used.add(name, psi.existentials[i].arity + 1);
        g.symS.push_back(name);
    }
    g.rho = psi.inputSig;
    g.rho.add(g.symD, 1);
    g.rho.add(g.symE, 2);
    g.rho.add(g.symL, 2);
    for (size_t i = 0; i < psi.existentials.size(); ++i)
        g.rho.add(g.symS[i], psi.existentials[i].arity + 1);

    // phi1: the relativization of "the quantified part fails" to the domain
    // flag, reading each existential atom off the markers.
    FormulaPtr chi =
        relativize(negate_prenex(psi.matrix), f_atom(g.symD, {"w"}));
    std::set<std::string> names;
    collect_var_names(chi, names);
    std::string zvar = "z";
    for (int i = 0; names.count(zvar); ++i) zvar = "z" + std::to_string(i);
    std::map<std::string, std::string> repl;
    for (size_t i = 0; i < psi.existentials.size(); ++i)
        repl[psi.existentials[i].name] = g.symS[i];
    g.phi1 = replace_by_markers(chi, repl, zvar);

    // phi2: some element receives no cycle edge and no marker tuple.
    int q = 1;
    for (auto& d : psi.existentials) q = std::max(q, d.arity);
    std::vector<std::string> us;
    for (int i = 1; i <= q; ++i) us.push_back("u" + std::to_string(i));
    std::vector<FormulaPtr> iso;
    iso.push_back(f_not(f_atom(g.symE, {us[0], "y"})));
    for (size_t i = 0; i < psi.existentials.size(); ++i) {
        std::vector<std::string> args(us.begin(),
                                      us.begin() + psi.existentials[i].arity);
        args.push_back("y");
        iso.push_back(f_not(f_atom(g.symS[i], args)));
    }
    g.phi2 = f_exists({"y"}, f_forall(us, f_and(std::move(iso))));

    // phi3: a marker element appears in no tuple besides its own.
    std::vector<FormulaPtr> ph3;
    for (size_t i = 0; i < psi.existentials.size(); ++i) {
        int r = psi.existentials[i].arity;
        std::vector<std::string> as;
        for (int k = 1; k <= r; ++k) as.push_back("a" + std::to_string(k));
        std::vector<std::string> marked = as;
        marked.push_back("y");
        FormulaPtr markerAtom = f_atom(g.symS[i], marked);
        // Not in any non-marker tuple.
        for (auto& [sym, arity] : g.rho.symbols) {
            bool isMarker = false;
            for (auto& m : g.symS)
                if (m == sym) isMarker = true;
            if (isMarker) continue;
            for (int p = 0; p < arity; ++p) {
                std::vector<std::string> bs, quant = marked;
                for (int k = 0; k < arity; ++k) {
                    if (k == p) {
                        bs.push_back("y");
                    } else {
                        std::string v = "b" + std::to_string(k + 1);
                        bs.push_back(v);
                        quant.push_back(v);
                    }
                }
                ph3.push_back(f_forall(
                    quant, f_or({f_not(markerAtom), f_not(f_atom(sym, bs))})));
            }
        }
        // Not inside the leading coordinates of any marker tuple.
        for (size_t j = 0; j < psi.existentials.size(); ++j) {
            int rj = psi.existentials[j].arity;
            for (int p = 0; p < rj; ++p) {
                std::vector<std::string> bs, quant = marked;
                for (int k = 0; k < rj; ++k) {
                    if (k == p) {
                        bs.push_back("y");
                    } else {
                        std::string v = "b" + std::to_string(k + 1);
                        bs.push_back(v);
                        quant.push_back(v);
                    }
                }
                bs.push_back("w");
                quant.push_back("w");
                ph3.push_back(f_forall(
                    quant,
                    f_or({f_not(markerAtom), f_not(f_atom(g.symS[j], bs))})));
            }
            // Last coordinate of at most one marker tuple.
            std::vector<std::string> bs, quant = marked;
            for (int k = 1; k <= rj; ++k) {
                std::string v = "b" + std::to_string(k);
                bs.push_back(v);
                quant.push_back(v);
            }
            bs.push_back("y");
            FormulaPtr other = f_atom(g.symS[j], bs);
            if (j != i) {
                ph3.push_back(
                    f_forall(quant, f_or({f_not(markerAtom), f_not(other)})));
            } else {
                std::vector<FormulaPtr> eqs;
                for (int k = 0; k < r; ++k) eqs.push_back(f_eq(as[k], bs[k]));
                ph3.push_back(f_forall(
                    quant, f_implies(f_and({markerAtom, other}), f_and(eqs))));
            }
        }
    }

    // phi4: cycle edges stay inside the domain flag.
    FormulaPtr phi4 = f_forall(
        {"x", "y"},
        f_implies(f_atom(g.symE, {"x", "y"}),
                  f_and({f_atom(g.symD, {"x"}), f_atom(g.symD, {"y"})})));
    ph3.push_back(phi4);
    g.phi34 = f_and(ph3);

    // phi5: in- and out-degree at most one.
    g.phi5 = f_and(
        {f_forall({"x", "y", "z"},
                  f_implies(f_and({f_atom(g.symE, {"x", "y"}),
                                   f_atom(g.symE, {"x", "z"})}),
                            f_eq("y", "z"))),
         f_forall({"x", "y", "z"},
                  f_implies(f_and({f_atom(g.symE, {"y", "x"}),
                                   f_atom(g.symE, {"z", "x"})}),
                            f_eq("y", "z")))});

    // phi6: strict linear order on the flagged domain, with at most one
    // cycle edge going backwards.
    auto inD = [&](const std::string& v) { return f_atom(g.symD, {v}); };
    auto lt = [&](const std::string& a, const std::string& b) {
        return f_atom(g.symL, {a, b});
    };
    g.phi6 = f_and(
        {f_forall({"x"}, f_implies(inD("x"), f_not(lt("x", "x")))),
         f_forall({"x", "y", "z"},
                  f_implies(f_and({inD("x"), inD("y"), inD("z"), lt("x", "y"),
                                   lt("y", "z")}),
                            lt("x", "z"))),
         f_forall({"x", "y"},
                  f_implies(f_and({inD("x"), inD("y")}),
                            f_or({lt("x", "y"), lt("y", "x"),
                                  f_eq("x", "y")}))),
         f_forall({"x", "y", "z", "w"},
                  f_implies(f_and({inD("x"), inD("y"), inD("z"), inD("w"),
                                   lt("x", "y"), lt("z", "w"),
                                   f_atom(g.symE, {"y", "x"}),
                                   f_atom(g.symE, {"w", "z"})}),
                            f_and({f_eq("x", "z"), f_eq("y", "w")})))});

    g.universalPart = f_and({g.phi34, g.phi5, g.phi6});
    g.formula = f_and({f_or({g.phi1, g.phi2}), g.universalPart});
    return g;
}

}  // namespace

Reduction exteso_to_herfo(const EsoSentence& psi) {
    FragmentReport rep = classify(psi);
    if (!rep.isExtensional)
        throw NotExtensional(rep.diagnostics.count("isExtensional")
                                 ? rep.diagnostics.at("isExtensional")
                                 : "sentence is not extensional");
    require_strict_extensional(psi, rep.extensionalPairs);
    if (!is_prenex(psi.matrix))
        throw NotPrenex("the first-order part must be prenex");

    auto [yesInst, noInst] = probe_yes_no(psi);
    Gadget g = build_gadget(psi);

    Signature tau = psi.inputSig;
    std::set<std::string> primed;
    for (auto& d : psi.existentials) primed.insert(*d.extendsSym);
    std::vector<EsoDecl> decls = psi.existentials;
    Signature rho = g.rho;

    Reduction r;
    r.outFormula = g.formula;
    r.polarity = Polarity::Complemented;
    r.forward = [tau, primed, decls, rho, g](const Structure& a) {
        check_sig(a, tau);
        std::vector<std::pair<int, Tuple>> markers;
        for (size_t i = 0; i < decls.size(); ++i)
            for (auto& t : all_tuples(a.n, decls[i].arity))
                if (!a.has_tuple(*decls[i].extendsSym, t))
                    markers.emplace_back(static_cast<int>(i), t);
        Structure b(rho, a.n + static_cast<int>(markers.size()));
        for (auto& [sym, arity] : tau.symbols)
            if (!primed.count(sym)) b.rels[sym] = a.tuples(sym);
        for (int v = 0; v < a.n; ++v) {
            b.add_tuple(g.symD, {v});
            b.add_tuple(g.symE, {v, (v + 1) % a.n});
            for (int u = v + 1; u < a.n; ++u) b.add_tuple(g.symL, {v, u});
        }
        for (size_t m = 0; m < markers.size(); ++m) {
            Tuple t = markers[m].second;
            t.push_back(a.n + static_cast<int>(m));
            b.add_tuple(g.symS[markers[m].first], t);
        }
        return b;
    };
    FormulaPtr guard = g.universalPart;
    r.reverse = [tau, decls, rho, g, guard, yesInst,
                 noInst](const Structure& b) {
        check_sig(b, rho);
        if (!eval_fo(guard, b)) return yesInst;
        // X: elements that are the marker of no tuple.
        std::vector<char> isMarker(b.n, 0);
        for (auto& s : g.symS)
            for (auto& t : b.tuples(s)) isMarker[t.back()] = 1;
        // Cycle edges have in/out degree <= 1 here; walk them.
        std::vector<int> succ(b.n, -1);
        for (auto& t : b.tuples(g.symE)) succ[t[0]] = t[1];
        std::vector<int> cycle;
        std::vector<char> seen(b.n, 0);
        for (int v = 0; v < b.n && cycle.empty(); ++v) {
            if (seen[v] || succ[v] < 0) continue;
            std::vector<int> path;
            std::map<int, size_t> pos;
            int cur = v;
            while (cur >= 0 && !pos.count(cur)) {
                if (seen[cur]) break;  // merges into an already handled walk
                pos[cur] = path.size();
                path.push_back(cur);
                seen[cur] = 1;
                cur = succ[cur];
            }
            if (cur >= 0 && pos.count(cur))
                cycle.assign(path.begin() + pos[cur], path.end());
        }
        if (cycle.empty()) return noInst;
        std::sort(cycle.begin(), cycle.end());
        std::map<int, int> idx;
        for (size_t i = 0; i < cycle.size(); ++i) idx[cycle[i]] = i;
        Structure a(tau, static_cast<int>(cycle.size()));
        std::set<std::string> primedSyms;
        for (auto& d : decls) primedSyms.insert(*d.extendsSym);
        for (auto& [sym, arity] : tau.symbols) {
            if (primedSyms.count(sym)) continue;
            for (auto& t : b.tuples(sym)) {
                Tuple u;
                bool inside = true;
                for (int e : t) {
                    if (!idx.count(e)) {
                        inside = false;
                        break;
                    }
                    u.push_back(idx[e]);
                }
                if (inside) a.add_tuple(sym, u);
            }
        }
        for (size_t i = 0; i < decls.size(); ++i) {
            for (auto& t : all_tuples(a.n, decls[i].arity)) {
                Tuple probe;
                for (int e : t) probe.push_back(cycle[e]);
                bool marked = false;
                for (auto& s : b.tuples(g.symS[i])) {
                    if (std::equal(probe.begin(), probe.end(), s.begin())) {
                        marked = true;
                        break;
                    }
                }
                if (!marked) a.add_tuple(*decls[i].extendsSym, t);
            }
        }
        return a;
    };
    return r;
}

// ---------------------------------------------------------------------------
// Monotone extensional SNP <-> CSP of a universal sentence

Reduction snp_to_csp(const EsoSentence& phi) {
    FragmentReport rep = classify(phi);
    if (!rep.isSNP) throw NotSNP("sentence is not in SNP");
    if (!rep.isMonotone) throw NotMonotone("sentence is not monotone");
    if (!rep.isExtensional) throw NotExtensional("sentence is not extensional");
    require_strict_extensional(phi, rep.extensionalPairs);

    Reduction r;
    Signature tau = phi.inputSig;
    if (phi.is_fo()) {
        r.outFormula = phi.matrix;
    } else {
        std::map<std::string, std::string> toPrimed;
        for (auto& [ex, primed] : rep.extensionalPairs) toPrimed[ex] = primed;
        PrenexCnf p = to_pcnf(phi.matrix);
        std::vector<FormulaPtr> clauses;
        for (auto& clause : p.clauses) {
            if (is_extension_clause(clause, rep.extensionalPairs)) continue;
            std::vector<Literal> renamed = clause;
            for (auto& l : renamed)
                if (!l.isEq && toPrimed.count(l.sym)) l.sym = toPrimed[l.sym];
            clauses.push_back(clause_formula(renamed));
        }
        std::vector<std::string> vars;
        for (auto& [isForall, v] : p.prefix) vars.push_back(v);
        FormulaPtr body = p.constantFalse ? f_false() : f_and(clauses);
        r.outFormula = vars.empty() ? body : f_forall(vars, body);
    }
    r.polarity = Polarity::Same;
    r.forward = [tau](const Structure& a) {
        check_sig(a, tau);
        return a;
    };
    r.reverse = r.forward;
    return r;
}

std::vector<Structure> bounds_of_universal(const FormulaPtr& phi,
                                           const Signature& sig,
                                           const EnumOptions& opts) {
    if (!is_universal(phi))
        throw BadParams("bounds require a universal sentence");
    std::set<std::string> vars;
    FormulaPtr cur = phi;
    while (cur->kind == FKind::Forall) {
        for (auto& v : cur->vars) vars.insert(v);
        cur = cur->kids[0];
    }
    int k = static_cast<int>(vars.size());
    std::vector<Structure> viol;
    if (k > 0)
        enumerate_structures(
            sig, k, true,
            [&](const Structure& s) {
                if (!eval_fo(phi, s)) viol.push_back(s);
                return true;
            },
            opts);
    std::vector<Structure> out;
    for (size_t i = 0; i < viol.size(); ++i) {
        bool minimal = true;
        for (size_t j = 0; j < viol.size() && minimal; ++j)
            if (j != i && find_morphism(viol[j], viol[i], MorphKind::Embedding))
                minimal = false;
        if (minimal) out.push_back(viol[i]);
    }
    std::sort(out.begin(), out.end(), [](const Structure& a, const Structure& b) {
        if (a.n != b.n) return a.n < b.n;
        return canonical_form(a) < canonical_form(b);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Twins, diagrams, blow-ups

FormulaPtr nt_formula(const Signature& sig) {
    std::vector<FormulaPtr> dis;
    for (auto& [sym, r] : sig.symbols) {
        std::vector<std::string> zs;
        for (int q = 1; q <= r; ++q) zs.push_back("z" + std::to_string(q));
        std::vector<FormulaPtr> flips;
        for (int p = 0; p < r; ++p) {
            std::vector<std::string> av, bv;
            for (int q = 0; q < r; ++q) {
                av.push_back(q == p ? "x" : zs[q]);
                bv.push_back(q == p ? "y" : zs[q]);
            }
            flips.push_back(f_iff(f_atom(sym, av), f_not(f_atom(sym, bv))));
        }
        FormulaPtr body = f_or(std::move(flips));
        dis.push_back(r >= 2 ? f_exists(zs, body) : body);
    }
    return f_or(std::move(dis));
}

FormulaPtr pd_diagram(const Structure& f) {
    auto var = [](int a) { return "x" + std::to_string(a); };
    std::vector<FormulaPtr> conj;
    for (auto& [sym, r] : f.sig.symbols)
        for (auto& t : all_tuples(f.n, r)) {
            std::vector<std::string> args;
            for (int e : t) args.push_back(var(e));
            FormulaPtr atom = f_atom(sym, args);
            conj.push_back(f.has_tuple(sym, t) ? atom : f_not(atom));
        }
    FormulaPtr nt = nt_formula(f.sig);
    for (int a = 0; a < f.n; ++a)
        for (int b = a + 1; b < f.n; ++b)
            conj.push_back(subst_vars(nt, {{"x", var(a)}, {"y", var(b)}}));
    return f_and(std::move(conj));
}

FormulaPtr blowup_sentence(const std::vector<Structure>& bounds,
                           const CnfOptions& opts) {
    if (bounds.empty()) return f_true();
    int m = 0;
    for (auto& b : bounds) {
        if (!(b.sig == bounds[0].sig))
            throw SignatureMismatch("bounds must share a signature");
        m = std::max(m, b.n);
    }
    std::vector<std::string> vars;
    for (int i = 0; i < m; ++i) vars.push_back("x" + std::to_string(i));
    std::vector<FormulaPtr> diagrams;
    for (auto& b : bounds) diagrams.push_back(pd_diagram(b));
    FormulaPtr sent = f_forall(vars, f_not(f_or(std::move(diagrams))));
    return to_pcnf(sent, opts).to_formula();
}

Reduction csp_to_snp(const FormulaPtr& phi, const Signature& sig) {
    std::vector<Structure> bounds = bounds_of_universal(phi, sig);
    FormulaPtr blow = blowup_sentence(bounds);
    PrenexCnf p = to_pcnf(blow);

    // One existential companion per input symbol, holding its closure.
    Signature used = sig;
    std::map<std::string, std::string> star;
    std::vector<EsoDecl> decls;
    for (auto& [sym, arity] : sig.symbols) {
        std::string name = fresh_name(sym + "_star", used, "R_star");
        used.add(name, arity);
        star[sym] = name;
        decls.push_back(EsoDecl{name, arity, sym});
    }

    // Close every clause over its own variables: much cheaper to evaluate
    // than one shared prefix, and prenexing re-merges the blocks anyway.
    auto close = [](FormulaPtr f) {
        std::vector<std::string> vs;
        for (auto& v : free_vars(f)) vs.push_back(v);
        return vs.empty() ? f : f_forall(vs, f);
    };
    std::vector<FormulaPtr> clauses;
    for (auto& [sym, arity] : sig.symbols) {
        std::vector<std::string> args;
        for (int i = 0; i < arity; ++i) args.push_back("x" + std::to_string(i));
        clauses.push_back(close(
            f_or({f_not(f_atom(sym, args)), f_atom(star[sym], args)})));
    }
    if (p.constantFalse) {
        clauses.push_back(f_false());
    } else {
        for (auto& clause : p.clauses) {
            std::vector<Literal> renamed = clause;
            for (auto& l : renamed)
                if (!l.isEq) l.sym = star[l.sym];
            clauses.push_back(close(clause_formula(renamed)));
        }
    }
    FormulaPtr matrix = f_and(std::move(clauses));

    Reduction r;
    r.outSentence = EsoSentence{sig, decls, matrix};
    r.polarity = Polarity::Same;
    r.forward = [sig](const Structure& a) {
        check_sig(a, sig);
        return a;
    };
    r.reverse = r.forward;
    return r;
}

std::vector<Structure> full_csp_bounds(const Structure& b,
                                       const EnumOptions& opts) {
    std::vector<Structure> cand;
    enumerate_structures(
        b.sig, b.n + 1, true,
        [&](const Structure& s) {
            if (point_determining(s) &&
                !find_morphism(s, b, MorphKind::Full))
                cand.push_back(s);
            return true;
        },
        opts);
    std::vector<Structure> out;
    for (size_t i = 0; i < cand.size(); ++i) {
        bool minimal = true;
        for (size_t j = 0; j < cand.size() && minimal; ++j)
            if (j != i && find_morphism(cand[j], cand[i], MorphKind::Embedding))
                minimal = false;
        if (minimal) out.push_back(cand[i]);
    }
    std::sort(out.begin(), out.end(), [](const Structure& x, const Structure& y) {
        if (x.n != y.n) return x.n < y.n;
        return canonical_form(x) < canonical_form(y);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Connectedization and scaffolding

Reduction connectedize(const EsoSentence& phi) {
    FragmentReport rep = classify(phi);
    if (!rep.isSNP) throw NotSNP("connectedization needs an SNP sentence");
    if (!rep.isExtensional)
        throw NotExtensional("connectedization needs an extensional sentence");

    Signature full = phi.full_signature();
    std::string eEx, eIn;
    for (int i = 0;; ++i) {
        std::string cand = i == 0 ? "E" : "E" + std::to_string(i);
        if (!full.has(cand) && !full.has(cand + "'")) {
            eEx = cand;
            eIn = cand + "'";
            break;
        }
    }

    PrenexCnf p = to_pcnf(phi.matrix);
    std::set<std::string> primedSyms;
    for (auto& [ex, primed] : rep.extensionalPairs) primedSyms.insert(primed);
    std::set<std::string> guarded;  // symbols whose tuples must be linked
    for (auto& [sym, arity] : phi.inputSig.symbols)
        if (!primedSyms.count(sym)) guarded.insert(sym);
    for (auto& d : phi.existentials) guarded.insert(d.name);

    int pool = static_cast<int>(p.prefix.size());
    pool = std::max(pool, 3);
    for (auto& [sym, arity] : phi.full_signature().symbols)
        pool = std::max(pool, arity);
    std::vector<std::string> vars;
    for (int i = 0; i < pool; ++i) vars.push_back("x" + std::to_string(i));
    auto E = [&](const std::string& a, const std::string& b) {
        return f_atom(eEx, {a, b});
    };

    std::vector<FormulaPtr> clauses;
    clauses.push_back(f_or({f_not(f_atom(eIn, {vars[0], vars[1]})),
                            E(vars[0], vars[1])}));
    for (auto& clause : p.clauses) {
        FormulaPtr base = clause_formula(clause);
        if (is_extension_clause(clause, rep.extensionalPairs) ||
            is_emptiness_guard(clause, rep.extensionalPairs)) {
            clauses.push_back(base);
            continue;
        }
        std::vector<std::string> cv;
        std::set<std::string> seen;
        for (auto& l : clause)
            for (auto& v : l.vars)
                if (seen.insert(v).second) cv.push_back(v);
        std::vector<FormulaPtr> lits = {base};
        for (auto& a : cv)
            for (auto& b : cv)
                if (a != b) lits.push_back(f_not(E(a, b)));
        clauses.push_back(f_or(std::move(lits)));
    }
    clauses.push_back(f_or({f_not(E(vars[0], vars[1])),
                            f_not(E(vars[1], vars[2])), E(vars[0], vars[2])}));
    clauses.push_back(f_or({f_not(E(vars[0], vars[1])), E(vars[1], vars[0])}));
    for (auto& [sym, arity] : phi.full_signature().symbols) {
        if (!guarded.count(sym) || arity < 2) continue;
        std::vector<std::string> args(vars.begin(), vars.begin() + arity);
        for (int i = 0; i < arity; ++i)
            for (int j = 0; j < arity; ++j)
                if (i != j)
                    clauses.push_back(f_or({f_not(f_atom(sym, args)),
                                            E(args[i], args[j])}));
    }

    Signature inSig = phi.inputSig;
    inSig.add(eIn, 2);
    std::vector<EsoDecl> decls = phi.existentials;
    decls.push_back(EsoDecl{eEx, 2, eIn});

    Reduction r;
    r.outSentence =
        EsoSentence{inSig, decls, f_forall(vars, f_and(std::move(clauses)))};
    r.polarity = Polarity::Same;
    Signature tau = phi.inputSig;
    r.forward = [tau, inSig, eIn](const Structure& a) {
        check_sig(a, tau);
        Structure b(inSig, a.n);
        for (auto& [sym, ts] : a.rels) b.rels[sym] = ts;
        for (int x = 0; x < a.n; ++x)
            for (int y = 0; y < a.n; ++y) b.add_tuple(eIn, {x, y});
        return b;
    };
    r.reverse = [tau, inSig](const Structure& b) {
        check_sig(b, inSig);
        Structure a(tau, b.n);
        for (auto& [sym, arity] : tau.symbols) a.rels[sym] = b.tuples(sym);
        return a;
    };
    return r;
}

EsoSentence add_extension_scaffold(const EsoSentence& phi) {
    Signature full = phi.full_signature();
    Signature inSig = phi.inputSig;
    std::vector<EsoDecl> decls = phi.existentials;
    std::vector<FormulaPtr> conjs = {phi.matrix};
    for (auto& d : decls) {
        if (d.extendsSym) continue;
        std::string primed = d.name + "'";
        if (!valid_symbol_name(primed) || full.has(primed))
            throw SymbolClash("no room for a primed companion of " + d.name);
        full.add(primed, d.arity);
        inSig.add(primed, d.arity);
        d.extendsSym = primed;
        std::vector<std::string> vs;
        for (int i = 0; i < d.arity; ++i)
            vs.push_back("x" + std::to_string(i));
        conjs.push_back(f_forall(vs, f_not(f_atom(primed, vs))));
        conjs.push_back(
            f_forall(vs, f_implies(f_atom(primed, vs), f_atom(d.name, vs))));
    }
    return EsoSentence{inSig, decls, f_and(std::move(conjs))};
}

}  // namespace eso
