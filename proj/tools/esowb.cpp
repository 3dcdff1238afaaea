// Batch front-end: parses sentence/structure files, runs the deciders and
// reduction compilers, and cross-checks reductions by oracle agreement.
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eso/encodings.hpp"
#include "eso/eval.hpp"
#include "eso/solver.hpp"
#include "eso/xform.hpp"

using json = nlohmann::ordered_json;
using namespace eso;

namespace {

struct Globals {
    long long budget = 1'000'000;
    std::uint64_t seed = 0;
    std::string outDir;
    bool forceJson = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string digest12(const std::string& s) {
    static const char* hex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(s);
    std::string out;
    for (int i = 15; i >= 4; --i) out += hex[(h >> (4 * i)) & 0xf];
    return out;
}

// Content-addressed emission: with --out, write <digest>.<ext> and return the
// path; otherwise return empty and let the caller inline the content.
std::string emit_file(const Globals& g, const std::string& content,
                      const std::string& ext) {
    if (g.outDir.empty()) return "";
    std::filesystem::create_directories(g.outDir);
    std::string path = g.outDir + "/" + digest12(content) + "." + ext;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

void put_artifact(json& j, const std::string& key, const Globals& g,
                  const std::string& content, const std::string& ext) {
    std::string path = emit_file(g, content, ext);
    if (path.empty())
        j[key] = content;
    else
        j[key] = path;
}

EsoSentence load_sentence(const std::string& path) {
    return parse_sentence(read_file(path));
}

Structure load_structure(const std::string& path) {
    return parse_structure(read_file(path));
}

FormulaPtr load_fo(const std::string& path) {
    EsoSentence s = load_sentence(path);
    if (!s.is_fo())
        throw ParseError("expected a first-order sentence in " + path);
    return s.matrix;
}

// Signature read off a formula's atoms, for serializing reduction outputs
// that are plain formulas over a derived signature.
Signature infer_signature(const FormulaPtr& f) {
    std::map<std::string, int> syms;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
        if (g->kind == FKind::Atom)
            syms[g->sym] = static_cast<int>(g->vars.size());
        for (auto& k : g->kids) walk(k);
    };
    walk(f);
    Signature sig;
    for (auto& [s, a] : syms) sig.add(s, a);
    return sig;
}

std::string serialize_fo(const FormulaPtr& f) {
    return serialize_sentence(EsoSentence{infer_signature(f), {}, f});
}

Strategy parse_strategy(const std::string& s) {
    if (s == "brute") return Strategy::Bruteforce;
    if (s == "selfreduce") return Strategy::Selfreduce;
    throw BadParams("unknown strategy " + s);
}

json verdict_json(const EsoSentence& psi, const Verdict& v) {
    json j;
    j["accepted"] = v.accepted;
    if (v.witness)
        j["witness"] = serialize_structure(
            expand_structure(psi, v.witness->base, v.witness->assigned));
    else
        j["witness"] = nullptr;
    return j;
}

// ---------------------------------------------------------------------------
// cross-check batteries

struct Disagreement {
    std::string input;
    bool expected = false;
    bool got = false;
};

struct Battery {
    long long instances = 0;
    long long agreements = 0;
    std::vector<Disagreement> disagreements;

    void record(const std::string& inputText, bool expected, bool got) {
        ++instances;
        if (expected == got)
            ++agreements;
        else if (disagreements.size() < 10)
            disagreements.push_back({digest12(inputText), expected, got});
    }
    bool clean() const {
        return instances == agreements;
    }
};

// Deliberate corruption hook: drop one tuple from a transformed structure so
// the harness can demonstrate that it catches broken reductions.
Structure corrupt(const Structure& a) {
    Structure b = a;
    for (auto& [sym, ts] : b.rels)
        if (!ts.empty()) {
            ts.erase(ts.begin());
            return b;
        }
    return b;
}

std::vector<std::pair<std::string, FormulaPtr>> hereditary_samples() {
    auto E = [](const std::string& a, const std::string& b) {
        return f_atom("E", {a, b});
    };
    std::vector<std::pair<std::string, FormulaPtr>> out;
    out.emplace_back("symmetric",
                     f_forall({"x", "y"}, f_implies(E("x", "y"), E("y", "x"))));
    out.emplace_back("antisymmetric",
                     f_forall({"x", "y"},
                              f_implies(E("x", "y"), f_not(E("y", "x")))));
    out.emplace_back("has-back-edge",
                     f_exists({"x", "y"}, f_and({E("x", "y"), E("y", "x")})));
    out.emplace_back("no-sink",
                     f_forall({"x"}, f_exists({"y"}, E("x", "y"))));
    out.emplace_back("has-source",
                     f_exists({"x"}, f_forall({"y"}, f_not(E("y", "x")))));
    return out;
}

FormulaPtr slo_axioms() {
    auto lt = [](const std::string& a, const std::string& b) {
        return f_atom("<", {a, b});
    };
    return f_forall(
        {"x", "y", "z"},
        f_and({f_not(lt("x", "x")),
               f_implies(f_and({lt("x", "y"), lt("y", "z")}), lt("x", "z")),
               f_or({lt("x", "y"), lt("y", "x"), f_eq("x", "y")})}));
}

Signature graph_sig() {
    Signature s;
    s.add("E", 2);
    return s;
}

EsoSentence two_color_ext() {
    return parse_sentence(R"eso((signature (E 2) (C1' 1) (C2' 1))
(exists2 ((C1 1 extends C1') (C2 1 extends C2'))
  (forall (x y)
    (and (implies (C1' x) (C1 x))
         (implies (C2' x) (C2 x))
         (or (C1 x) (C2 x))
         (or (not (E x y)) (not (C1 x)) (not (C1 y)))
         (or (not (E x y)) (not (C2 x)) (not (C2 y)))))))eso");
}

bool decide(const EsoSentence& psi, const Structure& a, long long budget) {
    return decide_ext_eso(psi, a, Strategy::Bruteforce, {budget}).accepted;
}

Battery xcheck_her2ext(const Globals& g, bool mutate) {
    Battery b;
    std::mt19937_64 rng(g.seed);
    for (auto& [name, phi] : hereditary_samples()) {
        Reduction rc = herfo_to_exteso(phi, graph_sig());
        auto probe = [&](const Structure& a) {
            Structure fwd = rc.forward(a);
            if (mutate) fwd = corrupt(fwd);
            bool expected = her_check(phi, a).member;
            bool got = !decide(*rc.outSentence, fwd, g.budget);
            b.record(name + "\n" + serialize_structure(a), expected, got);
        };
        enumerate_structures(graph_sig(), 3, true,
                             [&](const Structure& a) {
                                 probe(a);
                                 return true;
                             });
        for (int i = 0; i < 40; ++i)
            probe(random_structure(graph_sig(), 2 + static_cast<int>(rng() % 3),
                                   rng, 0.4));
    }
    return b;
}

Battery xcheck_ext2her(const Globals& g, bool mutate) {
    Battery b;
    std::mt19937_64 rng(g.seed);
    std::vector<std::pair<std::string, EsoSentence>> sentences = {
        {"dag", encode_dag()},
        {"precol3", encode_precol3()},
        {"kcolor2", encode_kcolor(2)}};
    for (auto& [name, psi] : sentences) {
        Reduction rc = exteso_to_herfo(psi);
        enumerate_structures(psi.inputSig, 2, true, [&](const Structure& a) {
            Structure fwd = rc.forward(a);
            if (mutate) fwd = corrupt(fwd);
            bool expected = decide(psi, a, g.budget);
            bool got = !her_check(rc.outFormula, fwd).member;
            b.record(name + "\n" + serialize_structure(a), expected, got);
            // instance round trip through the reverse map
            if (rc.reverse)
                b.record(name + "/rt\n" + serialize_structure(a), true,
                         isomorphic((*rc.reverse)(rc.forward(a)), a));
            return true;
        });
        // reverse direction on random gadget-signature structures; read the
        // signature off a forward image so the symbol order matches
        Signature rho = rc.forward(Structure(psi.inputSig, 1)).sig;
        for (int i = 0; i < 15; ++i) {
            Structure r = random_structure(
                rho, 2 + static_cast<int>(rng() % 3), rng, 0.3);
            bool expected = !her_check(rc.outFormula, r).member;
            bool got = decide(psi, (*rc.reverse)(r), g.budget);
            b.record(name + "/rev\n" + serialize_structure(r), expected, got);
        }
    }
    return b;
}

Battery xcheck_snp2csp(const Globals& g, bool mutate) {
    Battery b;
    EsoSentence psi = encode_kcolor(2);
    Reduction rc = snp_to_csp(psi);
    enumerate_structures(graph_sig(), 3, true, [&](const Structure& a) {
        Structure fwd = rc.forward(a);
        if (mutate) fwd = corrupt(fwd);
        bool expected = decide(psi, a, g.budget);
        bool got = decide_csp_universal(rc.outFormula, fwd).accepted;
        b.record(serialize_structure(a), expected, got);
        return true;
    });
    return b;
}

Battery xcheck_csp2snp(const Globals& g, bool mutate) {
    Battery b;
    Signature sig;
    sig.add("<", 2);
    FormulaPtr phi = slo_axioms();
    Reduction rc = csp_to_snp(phi, sig);
    enumerate_structures(sig, 3, true, [&](const Structure& a) {
        Structure fwd = rc.forward(a);
        if (mutate) fwd = corrupt(fwd);
        bool expected = decide_csp_universal(phi, a).accepted;
        bool got = decide(*rc.outSentence, fwd, g.budget);
        b.record(serialize_structure(a), expected, got);
        return true;
    });
    return b;
}

Battery xcheck_connectedize(const Globals& g, bool mutate) {
    Battery b;
    for (auto& psi : {encode_dag(), two_color_ext()}) {
        Reduction rc = connectedize(psi);
        enumerate_structures(psi.inputSig, 3, true, [&](const Structure& a) {
            Structure fwd = rc.forward(a);
            if (mutate) fwd = corrupt(fwd);
            bool expected = decide(psi, a, g.budget);
            bool got = decide(*rc.outSentence, fwd, g.budget);
            b.record(serialize_structure(a), expected, got);
            return true;
        });
    }
    return b;
}

Battery xcheck_scaffold(const Globals& g, bool) {
    Battery b;
    EsoSentence plain = parse_sentence(R"eso((signature (E 2))
(exists2 ((C1 1) (C2 1))
  (forall (x y)
    (and (or (C1 x) (C2 x))
         (or (not (E x y)) (not (C1 x)) (not (C1 y)))
         (or (not (E x y)) (not (C2 x)) (not (C2 y)))))))eso");
    EsoSentence scaffolded = add_extension_scaffold(plain);
    enumerate_structures(plain.inputSig, 3, true, [&](const Structure& a) {
        // embed the input with empty primed companions
        Structure lifted(scaffolded.inputSig, a.n);
        for (auto& [sym, arity] : a.sig.symbols)
            for (auto& t : a.tuples(sym)) lifted.add_tuple(sym, t);
        bool expected = decide(plain, a, g.budget);
        bool got = decide(scaffolded, lifted, g.budget);
        b.record(serialize_structure(a), expected, got);
        return true;
    });
    return b;
}

Battery xcheck_bounds(const Globals& g, bool) {
    Battery b;
    auto E = [](const std::string& x, const std::string& y) {
        return f_atom("E", {x, y});
    };
    FormulaPtr phi = f_forall(
        {"x", "y", "z"},
        f_and({f_not(E("x", "x")), f_implies(E("x", "y"), E("y", "x")),
               f_not(f_and({E("x", "y"), E("y", "z"), E("x", "z")}))}));
    auto bounds = bounds_of_universal(phi, graph_sig());
    enumerate_structures(graph_sig(), 3, true, [&](const Structure& a) {
        bool expected = eval_fo(phi, a);
        bool embeds = false;
        for (auto& f : bounds)
            if (find_morphism(f, a, MorphKind::Embedding)) embeds = true;
        b.record(serialize_structure(a), expected, !embeds);
        return true;
    });
    (void)g;
    return b;
}

Battery xcheck_fullbounds(const Globals& g, bool) {
    Battery b;
    Structure k2(graph_sig(), 2);
    k2.add_tuple("E", {0, 1});
    k2.add_tuple("E", {1, 0});
    auto bounds = full_csp_bounds(k2);
    enumerate_structures(graph_sig(), 3, true, [&](const Structure& a) {
        bool expected = find_morphism(a, k2, MorphKind::Full).has_value();
        bool embeds = false;
        for (auto& f : bounds)
            if (find_morphism(f, a, MorphKind::Embedding)) embeds = true;
        b.record(serialize_structure(a), expected, !embeds);
        return true;
    });
    (void)g;
    return b;
}

Battery xcheck_blowup(const Globals& g, bool) {
    Battery b;
    Structure loop(graph_sig(), 1);
    loop.add_tuple("E", {0, 0});
    Structure k2(graph_sig(), 2);
    k2.add_tuple("E", {0, 1});
    k2.add_tuple("E", {1, 0});
    Structure arc(graph_sig(), 2);
    arc.add_tuple("E", {0, 1});
    for (auto& boundsSet :
         std::vector<std::vector<Structure>>{{loop}, {k2}, {loop, arc}}) {
        FormulaPtr psi = blowup_sentence(boundsSet);
        enumerate_structures(graph_sig(), 3, true, [&](const Structure& a) {
            bool expected = true;
            Structure q = twin_quotient(a).b0;
            for (auto& f : boundsSet)
                if (find_morphism(f, q, MorphKind::Embedding))
                    expected = false;
            b.record(serialize_structure(a), expected, eval_fo(psi, a));
            return true;
        });
    }
    (void)g;
    return b;
}

Battery xcheck_nt(const Globals& g, bool) {
    Battery b;
    Signature sig;
    sig.add("E", 2);
    sig.add("U", 1);
    FormulaPtr nt = nt_formula(sig);
    enumerate_structures(sig, 3, true, [&](const Structure& a) {
        for (int x = 0; x < a.n; ++x)
            for (int y = 0; y < a.n; ++y) {
                if (x == y) continue;
                bool expected = !twin_pair(a, x, y);
                bool got = eval_fo(nt, a, {{"x", x}, {"y", y}});
                b.record(serialize_structure(a) + std::to_string(x) + "," +
                             std::to_string(y),
                         expected, got);
            }
        return true;
    });
    (void)g;
    return b;
}

Battery xcheck_pddiam(const Globals& g, bool) {
    Battery b;
    Structure k2(graph_sig(), 2);
    k2.add_tuple("E", {0, 1});
    k2.add_tuple("E", {1, 0});
    FormulaPtr diagram = pd_diagram(k2);
    std::vector<std::string> vars;
    for (int i = 0; i < k2.n; ++i) vars.push_back("x" + std::to_string(i));
    FormulaPtr closed = f_exists(vars, diagram);
    enumerate_structures(graph_sig(), 3, true, [&](const Structure& a) {
        bool expected =
            find_morphism(k2, twin_quotient(a).b0, MorphKind::Embedding)
                .has_value();
        b.record(serialize_structure(a), expected, eval_fo(closed, a));
        return true;
    });
    (void)g;
    return b;
}

Battery run_battery(const std::string& name, const Globals& g, bool mutate) {
    if (name == "her2ext") return xcheck_her2ext(g, mutate);
    if (name == "ext2her") return xcheck_ext2her(g, mutate);
    if (name == "snp2csp") return xcheck_snp2csp(g, mutate);
    if (name == "csp2snp") return xcheck_csp2snp(g, mutate);
    if (name == "connectedize") return xcheck_connectedize(g, mutate);
    if (name == "scaffold") return xcheck_scaffold(g, mutate);
    if (name == "bounds") return xcheck_bounds(g, mutate);
    if (name == "fullbounds") return xcheck_fullbounds(g, mutate);
    if (name == "blowup-sentence") return xcheck_blowup(g, mutate);
    if (name == "nt") return xcheck_nt(g, mutate);
    if (name == "pddiam") return xcheck_pddiam(g, mutate);
    throw BadParams("unknown reduction " + name);
}

// ---------------------------------------------------------------------------
// commands

int cmd_check(const Globals& g, const std::string& sentenceFile,
              const std::string& structureFile) {
    EsoSentence psi = load_sentence(sentenceFile);
    Structure a = load_structure(structureFile);
    if (psi.is_fo()) {
        bool v = eval_fo(psi.matrix, a);
        if (g.forceJson)
            std::cout << json{{"accepted", v}}.dump() << "\n";
        else
            std::cout << (v ? "true" : "false") << "\n";
        return 0;
    }
    Verdict v = decide_ext_eso(psi, a, Strategy::Bruteforce, {g.budget});
    std::cout << verdict_json(psi, v).dump() << "\n";
    return 0;
}

int cmd_her(const Globals&, const std::string& phiFile,
            const std::string& structureFile) {
    FormulaPtr phi = load_fo(phiFile);
    Structure a = load_structure(structureFile);
    HerVerdict v = her_check(phi, a);
    json j;
    j["member"] = v.member;
    if (v.counterexample)
        j["counterexample"] = *v.counterexample;
    else
        j["counterexample"] = nullptr;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_solve(const Globals& g, const std::string& sentenceFile,
              const std::string& structureFile, const std::string& strategy) {
    EsoSentence psi = load_sentence(sentenceFile);
    Structure a = load_structure(structureFile);
    Verdict v = decide_ext_eso(psi, a, parse_strategy(strategy), {g.budget});
    std::cout << verdict_json(psi, v).dump() << "\n";
    return 0;
}

int cmd_csp(const Globals&, const std::string& phiFile,
            const std::string& structureFile) {
    FormulaPtr phi = load_fo(phiFile);
    Structure a = load_structure(structureFile);
    CspVerdict v = decide_csp_universal(phi, a);
    json j;
    j["accepted"] = v.accepted;
    if (v.templ)
        j["template"] = serialize_structure(*v.templ);
    else
        j["template"] = nullptr;
    if (v.hom) {
        j["hom"] = v.hom->map;
    } else {
        j["hom"] = nullptr;
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_reduce(const Globals& g, const std::string& name,
               const std::vector<std::string>& inputs,
               const std::string& structureFile) {
    json j;
    j["reduction"] = name;
    if (inputs.empty()) throw BadParams("reduce needs an input file");

    auto finishReduction = [&](const Reduction& rc) {
        j["polarity"] =
            rc.polarity == Polarity::Same ? "same" : "complemented";
        std::string sentence = rc.outSentence
                                   ? serialize_sentence(*rc.outSentence)
                                   : serialize_fo(rc.outFormula);
        put_artifact(j, "sentence", g, sentence, "eso");
        if (!structureFile.empty()) {
            Structure fwd = rc.forward(load_structure(structureFile));
            put_artifact(j, "forward", g, serialize_structure(fwd), "fst");
        }
        std::cout << j.dump() << "\n";
        return 0;
    };

    if (name == "her2ext") {
        EsoSentence s = load_sentence(inputs[0]);
        if (!s.is_fo()) throw BadParams("her2ext expects a first-order input");
        return finishReduction(herfo_to_exteso(s.matrix, s.inputSig));
    }
    if (name == "ext2her")
        return finishReduction(exteso_to_herfo(load_sentence(inputs[0])));
    if (name == "snp2csp")
        return finishReduction(snp_to_csp(load_sentence(inputs[0])));
    if (name == "csp2snp") {
        EsoSentence s = load_sentence(inputs[0]);
        if (!s.is_fo()) throw BadParams("csp2snp expects a first-order input");
        return finishReduction(csp_to_snp(s.matrix, s.inputSig));
    }
    if (name == "connectedize")
        return finishReduction(connectedize(load_sentence(inputs[0])));
    if (name == "scaffold") {
        EsoSentence out = add_extension_scaffold(load_sentence(inputs[0]));
        j["polarity"] = "same";
        put_artifact(j, "sentence", g, serialize_sentence(out), "eso");
        std::cout << j.dump() << "\n";
        return 0;
    }
    if (name == "bounds" || name == "fullbounds") {
        std::vector<Structure> bs;
        if (name == "bounds") {
            EsoSentence s = load_sentence(inputs[0]);
            if (!s.is_fo())
                throw BadParams("bounds expects a first-order input");
            bs = bounds_of_universal(s.matrix, s.inputSig);
        } else {
            bs = full_csp_bounds(load_structure(inputs[0]));
        }
        j["bounds"] = json::array();
        for (auto& f : bs) {
            json entry;
            put_artifact(entry, "structure", g, serialize_structure(f), "fst");
            j["bounds"].push_back(entry["structure"]);
        }
        std::cout << j.dump() << "\n";
        return 0;
    }
    if (name == "blowup-sentence") {
        std::vector<Structure> bs;
        for (auto& path : inputs) bs.push_back(load_structure(path));
        put_artifact(j, "sentence", g, serialize_fo(blowup_sentence(bs)),
                     "eso");
        std::cout << j.dump() << "\n";
        return 0;
    }
    if (name == "nt") {
        Structure a = load_structure(inputs[0]);
        put_artifact(j, "formula", g,
                     formula_to_sexpr(nt_formula(a.sig)), "eso");
        std::cout << j.dump() << "\n";
        return 0;
    }
    if (name == "pddiam") {
        Structure f = load_structure(inputs[0]);
        put_artifact(j, "formula", g, formula_to_sexpr(pd_diagram(f)), "eso");
        std::cout << j.dump() << "\n";
        return 0;
    }
    throw BadParams("unknown reduction " + name);
}

int cmd_encode(const Globals& g, const std::string& problem, int k,
               const std::vector<std::string>& boundFiles,
               const std::string& templateFile, const std::string& phiFile,
               const std::string& alphabetCsv) {
    EsoSentence out;
    if (problem == "dag") {
        out = encode_dag();
    } else if (problem == "precol3") {
        out = encode_precol3();
    } else if (problem == "kcolor") {
        out = encode_kcolor(k);
    } else if (problem == "sandwich" || problem == "orient") {
        std::vector<Structure> bs;
        for (auto& p : boundFiles) bs.push_back(load_structure(p));
        if (bs.empty()) throw BadParams(problem + " needs --bounds");
        out = problem == "sandwich" ? encode_sandwich(bs) : encode_orient(bs);
    } else if (problem == "cts") {
        if (phiFile.empty() || alphabetCsv.empty())
            throw BadParams("cts needs --phi and --alphabet");
        std::vector<std::string> alphabet;
        std::stringstream ss(alphabetCsv);
        std::string item;
        while (std::getline(ss, item, ',')) alphabet.push_back(item);
        out = encode_cts(load_fo(phiFile), alphabet);
    } else if (problem == "csp" || problem == "fullcsp" ||
               problem == "surjcsp") {
        if (templateFile.empty()) throw BadParams(problem + " needs --template");
        Structure b = load_structure(templateFile);
        out = problem == "csp"       ? encode_csp(b)
              : problem == "fullcsp" ? encode_csp_full(b)
                                     : encode_surj_csp(b);
    } else if (problem == "gi") {
        out = encode_gi();
    } else if (problem == "mdual") {
        out = encode_mdual();
    } else {
        throw BadParams("unknown problem " + problem);
    }
    std::string text = serialize_sentence(out);
    std::string path = emit_file(g, text, "eso");
    if (path.empty())
        std::cout << text;
    else
        std::cout << json{{"sentence", path}}.dump() << "\n";
    return 0;
}

MonotoneCnf load_cnf(const std::string& path) {
    std::istringstream in(read_file(path));
    MonotoneCnf f;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        if (head == "vars") {
            if (!(ls >> f.varCount)) throw ParseError("bad vars line in " + path);
        } else if (head == "clause") {
            std::set<int> c;
            int v;
            while (ls >> v) c.insert(v);
            f.clauses.push_back(c);
        } else {
            throw ParseError("bad line '" + line + "' in " + path);
        }
    }
    return f;
}

int cmd_instance(const Globals& g, const std::string& problem,
                 const std::string& gFile, const std::string& hFile,
                 const std::string& pairsCsv, const std::string& phiFile,
                 const std::string& psiFile) {
    Structure out(Signature{}, 1);
    if (problem == "gi") {
        if (gFile.empty() || hFile.empty())
            throw BadParams("instance gi needs --left and --right");
        GiInstance inst{load_structure(gFile), load_structure(hFile), {}};
        std::stringstream ss(pairsCsv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw BadParams("pairs must look like 0:1,2:0");
            inst.partial.emplace_back(std::stoi(item.substr(0, colon)),
                                      std::stoi(item.substr(colon + 1)));
        }
        out = build_gi_instance(inst);
    } else if (problem == "mdual") {
        if (phiFile.empty() || psiFile.empty())
            throw BadParams("instance mdual needs --phi and --psi");
        out = build_mdual_instance(load_cnf(phiFile), load_cnf(psiFile));
    } else {
        throw BadParams("unknown problem " + problem);
    }
    std::string text = serialize_structure(out);
    std::string path = emit_file(g, text, "fst");
    if (path.empty())
        std::cout << text;
    else
        std::cout << json{{"structure", path}}.dump() << "\n";
    return 0;
}

int cmd_witness(const Globals& g, const std::string& sentenceFile,
                const std::string& structureFile) {
    EsoSentence psi = load_sentence(sentenceFile);
    Structure a = load_structure(structureFile);
    Oracle oracle = [&](const Structure& s) {
        return decide(psi, s, g.budget);
    };
    auto chain = extract_witness(psi, a, oracle, {g.budget});
    json j;
    j["accepted"] = chain.has_value();
    if (chain) {
        j["chain"] = json::array();
        for (auto& s : *chain) {
            json entry;
            put_artifact(entry, "structure", g, serialize_structure(s), "fst");
            j["chain"].push_back(entry["structure"]);
        }
    } else {
        j["chain"] = nullptr;
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_xcheck(const Globals& g, const std::string& name, bool mutate) {
    auto start = std::chrono::steady_clock::now();
    Battery b = run_battery(name, g, mutate);
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    json j;
    j["reduction"] = name;
    j["instanceCount"] = b.instances;
    j["agreements"] = b.agreements;
    j["disagreements"] = json::array();
    for (auto& d : b.disagreements)
        j["disagreements"].push_back(
            {{"input", d.input}, {"expected", d.expected}, {"got", d.got}});
    j["seed"] = g.seed;
    j["elapsed"] = elapsed;
    std::cout << j.dump() << "\n";
    return b.clean() ? 0 : 1;
}

int cmd_gen(const Globals& g, const std::string& what, int n) {
    if (what != "henson") throw BadParams("unknown generator " + what);
    std::string text = serialize_structure(henson(n));
    std::string path = emit_file(g, text, "fst");
    if (path.empty())
        std::cout << text;
    else
        std::cout << json{{"structure", path}}.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extensional ESO workbench"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--budget", g.budget, "node budget for the solver");
    app.add_option("--seed", g.seed, "PRNG seed for sampled instances");
    app.add_option("--out", g.outDir, "directory for content-addressed files");
    app.add_flag("--json", g.forceJson, "always emit JSON");

    std::string sentenceFile, structureFile, phiFile, name, strategy = "brute";
    std::string problem, templateFile, alphabetCsv, gFile, hFile, pairsCsv;
    std::string psiFile, genWhat;
    std::vector<std::string> inputs, boundFiles;
    int k = 0, n = 5;
    bool mutate = false;

    auto* check = app.add_subcommand("check", "decide a sentence on a structure");
    check->add_option("sentence", sentenceFile)->required();
    check->add_option("structure", structureFile)->required();

    auto* her = app.add_subcommand("her", "hereditary first-order membership");
    her->add_option("phi", phiFile)->required();
    her->add_option("structure", structureFile)->required();

    auto* solve = app.add_subcommand("solve", "decide with a chosen strategy");
    solve->add_option("sentence", sentenceFile)->required();
    solve->add_option("structure", structureFile)->required();
    solve->add_option("--strategy", strategy, "brute or selfreduce");

    auto* csp = app.add_subcommand("csp", "CSP of a universal sentence");
    csp->add_option("phi", phiFile)->required();
    csp->add_option("structure", structureFile)->required();

    auto* reduce = app.add_subcommand("reduce", "run a reduction compiler");
    reduce->add_option("name", name)->required();
    reduce->add_option("input", inputs, "input file(s)")->required();
    reduce->add_option("--structure", structureFile,
                       "structure to transform forward");

    auto* encode = app.add_subcommand("encode", "emit a problem sentence");
    encode->add_option("problem", problem)->required();
    encode->add_option("--k", k, "number of colours");
    encode->add_option("--bounds", boundFiles, "forbidden structure files");
    encode->add_option("--template", templateFile, "CSP template file");
    encode->add_option("--phi", phiFile, "first-order constraint file");
    encode->add_option("--alphabet", alphabetCsv, "comma-separated letters");

    auto* instance = app.add_subcommand("instance", "emit a problem instance");
    instance->add_option("problem", problem)->required();
    instance->add_option("--left", gFile, "left graph file");
    instance->add_option("--right", hFile, "right graph file");
    instance->add_option("--pairs", pairsCsv, "pinned pairs, e.g. 0:1,2:0");
    instance->add_option("--phi", phiFile, "first CNF file");
    instance->add_option("--psi", psiFile, "second CNF file");

    auto* witness = app.add_subcommand("witness", "search-to-decision chain");
    witness->add_option("sentence", sentenceFile)->required();
    witness->add_option("structure", structureFile)->required();

    auto* xcheck = app.add_subcommand("xcheck", "cross-check a reduction");
    xcheck->add_option("name", name)->required();
    xcheck->add_flag("--mutate", mutate,
                     "corrupt the forward transform (harness sanity check)");

    auto* gen = app.add_subcommand("gen", "emit a generated structure");
    gen->add_option("what", genWhat)->required();
    gen->add_option("--n", n, "size parameter");

    // let the global flags (--out, --seed, ...) appear after the subcommand
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(g, sentenceFile, structureFile);
        if (her->parsed()) return cmd_her(g, phiFile, structureFile);
        if (solve->parsed())
            return cmd_solve(g, sentenceFile, structureFile, strategy);
        if (csp->parsed()) return cmd_csp(g, phiFile, structureFile);
        if (reduce->parsed()) return cmd_reduce(g, name, inputs, structureFile);
        if (encode->parsed())
            return cmd_encode(g, problem, k, boundFiles, templateFile, phiFile,
                              alphabetCsv);
        if (instance->parsed())
            return cmd_instance(g, problem, gFile, hFile, pairsCsv, phiFile,
                                psiFile);
        if (witness->parsed())
            return cmd_witness(g, sentenceFile, structureFile);
        if (xcheck->parsed()) return cmd_xcheck(g, name, mutate);
        if (gen->parsed()) return cmd_gen(g, genWhat, n);
    } catch (const Error& e) {
        std::cerr << json{{"error", e.kind}, {"message", e.what()}}.dump()
                  << "\n";
        return (e.kind == "BudgetExceeded" || e.kind == "CapExceeded") ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}
                         .dump()
                  << "\n";
        return 2;
    }
    return 0;
}
