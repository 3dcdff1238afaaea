#include "eso/logic.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace eso {

// ---------------------------------------------------------------------------
// Builders

static FormulaPtr mk(FKind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

FormulaPtr f_true() {
    static FormulaPtr t = mk(FKind::True);
    return t;
}
FormulaPtr f_false() {
    static FormulaPtr f = mk(FKind::False);
    return f;
}
FormulaPtr f_atom(const std::string& sym, std::vector<std::string> vars) {
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Atom;
    f->sym = sym;
    f->vars = std::move(vars);
    return f;
}
FormulaPtr f_eq(const std::string& a, const std::string& b) {
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Eq;
    f->vars = {a, b};
    return f;
}
FormulaPtr f_not(FormulaPtr g) {
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Not;
    f->kids = {std::move(g)};
    return f;
}
FormulaPtr f_and(std::vector<FormulaPtr> kids) {
    if (kids.empty()) return f_true();
    if (kids.size() == 1) return kids[0];
    auto f = std::make_shared<Formula>();
    f->kind = FKind::And;
    f->kids = std::move(kids);
    return f;
}
FormulaPtr f_or(std::vector<FormulaPtr> kids) {
    if (kids.empty()) return f_false();
    if (kids.size() == 1) return kids[0];
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Or;
    f->kids = std::move(kids);
    return f;
}
FormulaPtr f_implies(FormulaPtr l, FormulaPtr r) {
    if (l->kind == FKind::True) return r;
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Implies;
    f->kids = {std::move(l), std::move(r)};
    return f;
}
FormulaPtr f_iff(FormulaPtr l, FormulaPtr r) {
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Iff;
    f->kids = {std::move(l), std::move(r)};
    return f;
}
FormulaPtr f_forall(std::vector<std::string> vars, FormulaPtr body) {
    if (vars.empty()) return body;
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Forall;
    f->vars = std::move(vars);
    f->kids = {std::move(body)};
    return f;
}
FormulaPtr f_exists(std::vector<std::string> vars, FormulaPtr body) {
    if (vars.empty()) return body;
    auto f = std::make_shared<Formula>();
    f->kind = FKind::Exists;
    f->vars = std::move(vars);
    f->kids = {std::move(body)};
    return f;
}

// ---------------------------------------------------------------------------
// Basic formula utilities

static void free_vars_rec(const FormulaPtr& f, std::set<std::string>& bound,
                          std::set<std::string>& out) {
    switch (f->kind) {
        case FKind::Atom:
        case FKind::Eq:
            for (auto& v : f->vars)
                if (!bound.count(v)) out.insert(v);
            break;
        case FKind::Forall:
        case FKind::Exists: {
            std::vector<std::string> added;
            for (auto& v : f->vars)
                if (bound.insert(v).second) added.push_back(v);
            free_vars_rec(f->kids[0], bound, out);
            for (auto& v : added) bound.erase(v);
            break;
        }
        default:
            for (auto& k : f->kids) free_vars_rec(k, bound, out);
    }
}

std::set<std::string> free_vars(const FormulaPtr& f) {
    std::set<std::string> bound, out;
    free_vars_rec(f, bound, out);
    return out;
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a->kind != b->kind || a->vars != b->vars || a->sym != b->sym ||
        a->kids.size() != b->kids.size())
        return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!formula_equal(a->kids[i], b->kids[i])) return false;
    return true;
}

std::string formula_to_sexpr(const FormulaPtr& f) {
    std::ostringstream out;
    switch (f->kind) {
        case FKind::True: out << "true"; break;
        case FKind::False: out << "false"; break;
        case FKind::Eq:
            out << "(= " << f->vars[0] << ' ' << f->vars[1] << ')';
            break;
        case FKind::Atom:
            out << '(' << f->sym;
            for (auto& v : f->vars) out << ' ' << v;
            out << ')';
            break;
        case FKind::Not:
            out << "(not " << formula_to_sexpr(f->kids[0]) << ')';
            break;
        case FKind::And:
        case FKind::Or:
            out << (f->kind == FKind::And ? "(and" : "(or");
            for (auto& k : f->kids) out << ' ' << formula_to_sexpr(k);
            out << ')';
            break;
        case FKind::Implies:
        case FKind::Iff:
            out << (f->kind == FKind::Implies ? "(implies " : "(iff ")
                << formula_to_sexpr(f->kids[0]) << ' '
                << formula_to_sexpr(f->kids[1]) << ')';
            break;
        case FKind::Forall:
        case FKind::Exists:
            out << (f->kind == FKind::Forall ? "(forall (" : "(exists (");
            for (size_t i = 0; i < f->vars.size(); ++i)
                out << (i ? " " : "") << f->vars[i];
            out << ") " << formula_to_sexpr(f->kids[0]) << ')';
            break;
    }
    return out.str();
}

static void collect_names(const FormulaPtr& f, std::set<std::string>& out) {
    for (auto& v : f->vars) out.insert(v);
    for (auto& k : f->kids) collect_names(k, out);
}

static std::string fresh_name(const std::set<std::string>& used,
                              const std::string& base) {
    for (int i = 0;; ++i) {
        std::string cand = base + "_" + std::to_string(i);
        if (!used.count(cand)) return cand;
    }
}

static FormulaPtr subst_rec(const FormulaPtr& f,
                            std::map<std::string, std::string> sub,
                            std::set<std::string>& used) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
            return f;
        case FKind::Atom:
        case FKind::Eq: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& v : g->vars) {
                auto it = sub.find(v);
                if (it != sub.end()) v = it->second;
            }
            return g;
        }
        case FKind::Forall:
        case FKind::Exists: {
            auto g = std::make_shared<Formula>(*f);
            // Bound names shadow; rename them if they would capture an image.
            std::set<std::string> images;
            for (auto& [from, to] : sub) images.insert(to);
            for (auto& v : g->vars) {
                sub.erase(v);
                if (images.count(v)) {
                    std::string nv = fresh_name(used, v);
                    used.insert(nv);
                    sub[v] = nv;
                    v = nv;
                }
            }
            g->kids = {subst_rec(f->kids[0], sub, used)};
            return g;
        }
        default: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& k : g->kids) k = subst_rec(k, sub, used);
            return g;
        }
    }
}

FormulaPtr subst_vars(const FormulaPtr& f,
                      const std::map<std::string, std::string>& sub) {
    if (sub.empty()) return f;
    std::set<std::string> used;
    collect_names(f, used);
    for (auto& [a, b] : sub) {
        used.insert(a);
        used.insert(b);
    }
    return subst_rec(f, sub, used);
}

bool is_prenex(const FormulaPtr& f) {
    FormulaPtr cur = f;
    while (cur->kind == FKind::Forall || cur->kind == FKind::Exists)
        cur = cur->kids[0];
    // The remainder must be quantifier-free.
    std::vector<FormulaPtr> stack = {cur};
    while (!stack.empty()) {
        FormulaPtr g = stack.back();
        stack.pop_back();
        if (g->kind == FKind::Forall || g->kind == FKind::Exists) return false;
        for (auto& k : g->kids) stack.push_back(k);
    }
    return true;
}

// ---------------------------------------------------------------------------
// EsoSentence

Signature EsoSentence::full_signature() const {
    Signature s = inputSig;
    for (auto& d : existentials) s.add(d.name, d.arity);
    return s;
}

// ---------------------------------------------------------------------------
// S-expression parser

namespace {

struct SNode {
    bool isAtom = true;
    std::string atom;
    std::vector<SNode> kids;
};

struct Tokenizer {
    const std::string& text;
    size_t pos = 0;

    explicit Tokenizer(const std::string& t) : text(t) {}

    std::optional<std::string> next() {
        while (pos < text.size()) {
            char c = text[pos];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else if (c == ';') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        if (pos >= text.size()) return std::nullopt;
        char c = text[pos];
        if (c == '(' || c == ')') {
            ++pos;
            return std::string(1, c);
        }
        size_t start = pos;
        while (pos < text.size()) {
            char d = text[pos];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' ||
                d == ')' || d == ';')
                break;
            ++pos;
        }
        return text.substr(start, pos - start);
    }
};

SNode parse_snode(Tokenizer& tok) {
    auto t = tok.next();
    if (!t) throw ParseError("unexpected end of input");
    if (*t == ")") throw ParseError("unexpected ')'");
    if (*t != "(") {
        SNode n;
        n.atom = *t;
        return n;
    }
    SNode n;
    n.isAtom = false;
    while (true) {
        size_t save = tok.pos;
        auto u = tok.next();
        if (!u) throw ParseError("missing ')'");
        if (*u == ")") break;
        tok.pos = save;
        n.kids.push_back(parse_snode(tok));
    }
    return n;
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected integer " + what + ", got '" + s + "'");
    }
}

bool valid_variable_name(const std::string& s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0])))
        return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
            c != '\'')
            return false;
    return true;
}

FormulaPtr parse_fo(const SNode& n, const Signature& sig,
                    std::map<std::string, int>& bound) {
    if (n.isAtom) {
        if (n.atom == "true") return f_true();
        if (n.atom == "false") return f_false();
        throw ParseError("expected formula, got '" + n.atom + "'");
    }
    if (n.kids.empty() || !n.kids[0].isAtom)
        throw ParseError("expected operator at head of list");
    const std::string& head = n.kids[0].atom;

    auto need = [&](size_t k) {
        if (n.kids.size() != k + 1)
            throw ParseError("'" + head + "' expects " + std::to_string(k) +
                             " arguments");
    };
    auto var_arg = [&](const SNode& a) {
        if (!a.isAtom || !valid_variable_name(a.atom))
            throw ParseError("expected variable, got a list or bad token");
        if (!bound.count(a.atom) || bound[a.atom] == 0)
            throw ParseError("unbound variable '" + a.atom + "'");
        return a.atom;
    };

    if (head == "forall" || head == "exists") {
        need(2);
        const SNode& vs = n.kids[1];
        if (vs.isAtom || vs.kids.empty())
            throw ParseError("'" + head + "' needs a nonempty variable list");
        std::vector<std::string> vars;
        for (auto& v : vs.kids) {
            if (!v.isAtom || !valid_variable_name(v.atom))
                throw ParseError("bad variable in quantifier list");
            vars.push_back(v.atom);
            ++bound[v.atom];
        }
        FormulaPtr body = parse_fo(n.kids[2], sig, bound);
        for (auto& v : vars) --bound[v];
        return head == "forall" ? f_forall(vars, body)
                                : f_exists(vars, body);
    }
    if (head == "and" || head == "or") {
        if (n.kids.size() < 2)
            throw ParseError("'" + head + "' needs at least one argument");
        std::vector<FormulaPtr> kids;
        for (size_t i = 1; i < n.kids.size(); ++i)
            kids.push_back(parse_fo(n.kids[i], sig, bound));
        return head == "and" ? f_and(kids) : f_or(kids);
    }
    if (head == "not") {
        need(1);
        return f_not(parse_fo(n.kids[1], sig, bound));
    }
    if (head == "implies" || head == "iff") {
        need(2);
        FormulaPtr l = parse_fo(n.kids[1], sig, bound);
        FormulaPtr r = parse_fo(n.kids[2], sig, bound);
        return head == "implies" ? f_implies(l, r) : f_iff(l, r);
    }
    if (head == "=") {
        need(2);
        return f_eq(var_arg(n.kids[1]), var_arg(n.kids[2]));
    }
    // Relational atom.
    if (!sig.has(head)) throw UnknownSymbol("relation symbol '" + head + "'");
    int arity = sig.arity(head);
    if (static_cast<int>(n.kids.size()) - 1 != arity)
        throw ArityError("atom " + head + " expects " + std::to_string(arity) +
                         " arguments");
    std::vector<std::string> vars;
    for (size_t i = 1; i < n.kids.size(); ++i) vars.push_back(var_arg(n.kids[i]));
    return f_atom(head, vars);
}

}  // namespace

EsoSentence parse_sentence(const std::string& text) {
    Tokenizer tok(text);
    SNode sigNode = parse_snode(tok);
    SNode sentNode = parse_snode(tok);
    if (auto extra = tok.next())
        throw ParseError("trailing tokens after the sentence");

    if (sigNode.isAtom || sigNode.kids.empty() || !sigNode.kids[0].isAtom ||
        sigNode.kids[0].atom != "signature")
        throw ParseError("file must start with a (signature ...) form");
    EsoSentence s;
    for (size_t i = 1; i < sigNode.kids.size(); ++i) {
        const SNode& d = sigNode.kids[i];
        if (d.isAtom || d.kids.size() != 2 || !d.kids[0].isAtom ||
            !d.kids[1].isAtom)
            throw ParseError("signature entries are (name arity) pairs");
        s.inputSig.add(d.kids[0].atom, parse_int(d.kids[1].atom, "arity"));
    }
    if (s.inputSig.symbols.empty())
        throw ParseError("signature must declare at least one symbol");

    const SNode* fo = &sentNode;
    if (!sentNode.isAtom && !sentNode.kids.empty() &&
        sentNode.kids[0].isAtom && sentNode.kids[0].atom == "exists2") {
        if (sentNode.kids.size() != 3)
            throw ParseError("exists2 expects a declaration list and a body");
        const SNode& decls = sentNode.kids[1];
        if (decls.isAtom || decls.kids.empty())
            throw ParseError("exists2 needs a nonempty declaration list");
        for (auto& d : decls.kids) {
            if (d.isAtom || (d.kids.size() != 2 && d.kids.size() != 4))
                throw ParseError(
                    "declarations are (name arity) or (name arity extends "
                    "name)");
            for (auto& k : d.kids)
                if (!k.isAtom) throw ParseError("bad existential declaration");
            EsoDecl decl;
            decl.name = d.kids[0].atom;
            if (!valid_symbol_name(decl.name))
                throw ParseError("bad existential symbol name '" + decl.name +
                                 "'");
            decl.arity = parse_int(d.kids[1].atom, "arity");
            if (decl.arity < 1)
                throw ArityError("existential arity must be positive");
            if (s.inputSig.has(decl.name))
                throw DuplicateExistential("'" + decl.name +
                                           "' clashes with an input symbol");
            for (auto& e : s.existentials)
                if (e.name == decl.name)
                    throw DuplicateExistential("'" + decl.name +
                                               "' declared twice");
            if (d.kids.size() == 4) {
                if (d.kids[2].atom != "extends")
                    throw ParseError("expected 'extends' in declaration");
                const std::string& target = d.kids[3].atom;
                if (!s.inputSig.has(target))
                    throw UnknownSymbol("extends target '" + target + "'");
                if (s.inputSig.arity(target) != decl.arity)
                    throw ArityError("extends target '" + target +
                                     "' has a different arity");
                decl.extendsSym = target;
            }
            s.existentials.push_back(decl);
        }
        fo = &sentNode.kids[2];
    }
    Signature full = s.full_signature();
    std::map<std::string, int> bound;
    s.matrix = parse_fo(*fo, full, bound);
    return s;
}

std::string serialize_sentence(const EsoSentence& s) {
    std::ostringstream out;
    out << "(signature";
    for (auto& [name, arity] : s.inputSig.symbols)
        out << " (" << name << ' ' << arity << ')';
    out << ")\n";
    if (s.is_fo()) {
        out << formula_to_sexpr(s.matrix) << '\n';
        return out.str();
    }
    out << "(exists2 (";
    for (size_t i = 0; i < s.existentials.size(); ++i) {
        auto& d = s.existentials[i];
        out << (i ? " (" : "(") << d.name << ' ' << d.arity;
        if (d.extendsSym) out << " extends " << *d.extendsSym;
        out << ')';
    }
    out << ")\n  " << formula_to_sexpr(s.matrix) << ")\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Prenex CNF

namespace {

// Rewrite implies/iff away.
FormulaPtr elim_arrows(const FormulaPtr& f) {
    switch (f->kind) {
        case FKind::Implies:
            return f_or({f_not(elim_arrows(f->kids[0])),
                         elim_arrows(f->kids[1])});
        case FKind::Iff: {
            FormulaPtr l = elim_arrows(f->kids[0]);
            FormulaPtr r = elim_arrows(f->kids[1]);
            return f_and({f_or({f_not(l), r}), f_or({l, f_not(r)})});
        }
        case FKind::True:
        case FKind::False:
        case FKind::Atom:
        case FKind::Eq:
            return f;
        default: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& k : g->kids) k = elim_arrows(k);
            return g;
        }
    }
}

FormulaPtr to_nnf(const FormulaPtr& f, bool neg) {
    switch (f->kind) {
        case FKind::True: return neg ? f_false() : f_true();
        case FKind::False: return neg ? f_true() : f_false();
        case FKind::Atom:
        case FKind::Eq: return neg ? f_not(f) : f;
        case FKind::Not: return to_nnf(f->kids[0], !neg);
        case FKind::And:
        case FKind::Or: {
            std::vector<FormulaPtr> kids;
            for (auto& k : f->kids) kids.push_back(to_nnf(k, neg));
            bool isAnd = (f->kind == FKind::And) != neg;
            return isAnd ? f_and(kids) : f_or(kids);
        }
        case FKind::Forall:
        case FKind::Exists: {
            FormulaPtr body = to_nnf(f->kids[0], neg);
            bool isForall = (f->kind == FKind::Forall) != neg;
            return isForall ? f_forall(f->vars, body)
                            : f_exists(f->vars, body);
        }
        default:
            throw NotPrenex("arrows must be eliminated before NNF");
    }
}

// Rename bound variables apart with placeholder names "@k".
FormulaPtr rename_apart(const FormulaPtr& f,
                        std::map<std::string, std::string> env, int& counter) {
    switch (f->kind) {
        case FKind::True:
        case FKind::False:
            return f;
        case FKind::Atom:
        case FKind::Eq: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& v : g->vars) {
                auto it = env.find(v);
                if (it != env.end()) v = it->second;
            }
            return g;
        }
        case FKind::Forall:
        case FKind::Exists: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& v : g->vars) {
                std::string nv = "@" + std::to_string(counter++);
                env[v] = nv;
                v = nv;
            }
            g->kids = {rename_apart(f->kids[0], env, counter)};
            return g;
        }
        default: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& k : g->kids) k = rename_apart(k, env, counter);
            return g;
        }
    }
}

// Pull quantifiers to the front, left-to-right by first occurrence.
FormulaPtr pull_prefix(const FormulaPtr& f,
                       std::vector<std::pair<bool, std::string>>& prefix) {
    switch (f->kind) {
        case FKind::Forall:
        case FKind::Exists: {
            bool isForall = f->kind == FKind::Forall;
            for (auto& v : f->vars) prefix.emplace_back(isForall, v);
            return pull_prefix(f->kids[0], prefix);
        }
        case FKind::And:
        case FKind::Or: {
            auto g = std::make_shared<Formula>(*f);
            for (auto& k : g->kids) k = pull_prefix(k, prefix);
            return g;
        }
        case FKind::Not: {
            auto g = std::make_shared<Formula>(*f);
            g->kids = {pull_prefix(f->kids[0], prefix)};
            return g;
        }
        default:
            return f;
    }
}

using Clause = std::vector<Literal>;
using ClauseSet = std::vector<Clause>;

long long literal_count(const ClauseSet& cs) {
    long long n = 0;
    for (auto& c : cs) n += static_cast<long long>(c.size());
    return n;
}

// NNF quantifier-free formula -> clause set. Empty set = true; a set
// containing the empty clause = false.
ClauseSet distribute(const FormulaPtr& f, long long budget) {
    switch (f->kind) {
        case FKind::True: return {};
        case FKind::False: return {{}};
        case FKind::Atom:
        case FKind::Eq: {
            Literal l;
            l.neg = false;
            l.isEq = f->kind == FKind::Eq;
            l.sym = f->sym;
            l.vars = f->vars;
            return {{l}};
        }
        case FKind::Not: {
            const FormulaPtr& a = f->kids[0];
            if (a->kind != FKind::Atom && a->kind != FKind::Eq)
                throw NotPrenex("negation below literals after NNF");
            Literal l;
            l.neg = true;
            l.isEq = a->kind == FKind::Eq;
            l.sym = a->sym;
            l.vars = a->vars;
            return {{l}};
        }
        case FKind::And: {
            ClauseSet out;
            for (auto& k : f->kids) {
                ClauseSet part = distribute(k, budget);
                out.insert(out.end(), part.begin(), part.end());
                if (literal_count(out) > budget)
                    throw CnfBlowup("clause budget exceeded");
            }
            return out;
        }
        case FKind::Or: {
            ClauseSet out = {{}};
            for (auto& k : f->kids) {
                ClauseSet part = distribute(k, budget);
                ClauseSet next;
                for (auto& a : out)
                    for (auto& b : part) {
                        Clause c = a;
                        c.insert(c.end(), b.begin(), b.end());
                        next.push_back(std::move(c));
                        if (literal_count(next) > budget)
                            throw CnfBlowup("clause budget exceeded");
                    }
                out = std::move(next);
            }
            return out;
        }
        default:
            throw NotPrenex("quantifier in matrix during CNF distribution");
    }
}

}  // namespace

PrenexCnf to_pcnf(const FormulaPtr& f, const CnfOptions& opts) {
    if (!free_vars(f).empty())
        throw UnboundVariable("prenex normalization requires a sentence");
    int counter = 0;
    FormulaPtr g = rename_apart(to_nnf(elim_arrows(f), false), {}, counter);
    PrenexCnf out;
    FormulaPtr matrix = pull_prefix(g, out.prefix);
    // Final names: x0, x1, ... in prefix order.
    std::map<std::string, std::string> finals;
    std::map<std::string, size_t> position;
    for (size_t i = 0; i < out.prefix.size(); ++i) {
        std::string nv = "x" + std::to_string(i);
        finals[out.prefix[i].second] = nv;
        out.prefix[i].second = nv;
        position[nv] = i;
    }
    matrix = subst_vars(matrix, finals);

    ClauseSet clauses = distribute(matrix, opts.literalBudget);

    auto universal = [&](const std::string& v) {
        auto it = position.find(v);
        return it != position.end() && out.prefix[it->second].first;
    };

    for (auto& clause : clauses) {
        Clause cur = clause;
        bool tautology = false;
        // Resolve equality literals.
        while (true) {
            bool changed = false;
            for (size_t i = 0; i < cur.size(); ++i) {
                Literal& l = cur[i];
                if (!l.isEq) continue;
                if (l.vars[0] == l.vars[1]) {
                    if (l.neg) {
                        cur.erase(cur.begin() + i);  // x != x is false
                    } else {
                        tautology = true;  // x = x is true
                    }
                    changed = true;
                    break;
                }
                if (l.neg && universal(l.vars[0]) && universal(l.vars[1])) {
                    // Merge the two variables: keep the earlier prefix one.
                    std::string keep = l.vars[0], drop = l.vars[1];
                    if (position[keep] > position[drop]) std::swap(keep, drop);
                    cur.erase(cur.begin() + i);
                    for (auto& m : cur)
                        for (auto& v : m.vars)
                            if (v == drop) v = keep;
                    changed = true;
                    break;
                }
            }
            if (tautology || !changed) break;
        }
        if (tautology) continue;
        std::sort(cur.begin(), cur.end());
        cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
        // Complementary pair check.
        for (size_t i = 0; i + 1 < cur.size() && !tautology; ++i) {
            Literal a = cur[i], b = cur[i + 1];
            if (a.isEq == b.isEq && a.sym == b.sym && a.vars == b.vars &&
                a.neg != b.neg)
                tautology = true;
        }
        if (tautology) continue;
        if (cur.empty()) {
            out.constantFalse = true;
            out.clauses.clear();
            return out;
        }
        if (std::find(out.clauses.begin(), out.clauses.end(), cur) ==
            out.clauses.end())
            out.clauses.push_back(cur);
    }
    return out;
}

FormulaPtr PrenexCnf::to_formula() const {
    if (constantFalse) return f_false();
    if (clauses.empty()) return f_true();
    std::vector<FormulaPtr> conj;
    for (auto& clause : clauses) {
        std::vector<FormulaPtr> lits;
        for (auto& l : clause) {
            FormulaPtr base = l.isEq ? f_eq(l.vars[0], l.vars[1])
                                     : f_atom(l.sym, l.vars);
            lits.push_back(l.neg ? f_not(base) : base);
        }
        conj.push_back(f_or(lits));
    }
    FormulaPtr out = f_and(conj);
    // Wrap the prefix, grouping runs of the same quantifier.
    for (int i = static_cast<int>(prefix.size()) - 1; i >= 0;) {
        int j = i;
        while (j >= 0 && prefix[j].first == prefix[i].first) --j;
        std::vector<std::string> vars;
        for (int k = j + 1; k <= i; ++k) vars.push_back(prefix[k].second);
        out = prefix[i].first ? f_forall(vars, out) : f_exists(vars, out);
        i = j;
    }
    return out;
}

FormulaPtr to_prenex_cnf(const FormulaPtr& f, const CnfOptions& opts) {
    return to_pcnf(f, opts).to_formula();
}

// ---------------------------------------------------------------------------
// Canonical database

static void collect_clause_literals(const FormulaPtr& f,
                                    std::vector<Literal>& out) {
    if (f->kind == FKind::Or) {
        for (auto& k : f->kids) collect_clause_literals(k, out);
        return;
    }
    bool neg = f->kind == FKind::Not;
    const FormulaPtr& a = neg ? f->kids[0] : f;
    if (a->kind == FKind::Atom) {
        out.push_back({neg, false, a->sym, a->vars});
    } else if (a->kind == FKind::Eq) {
        if (!neg) throw PositiveEquality("clause contains a positive equality");
        out.push_back({true, true, "", a->vars});
    } else {
        throw BadParams("clause must be a disjunction of literals");
    }
}

Structure canonical_database(const FormulaPtr& clause, const Signature& sig,
                             std::vector<std::string>* varOrder) {
    std::vector<Literal> lits;
    collect_clause_literals(clause, lits);
    std::vector<std::string> vars;
    std::map<std::string, int> index;
    for (auto& l : lits)
        for (auto& v : l.vars)
            if (!index.count(v)) {
                index[v] = static_cast<int>(vars.size());
                vars.push_back(v);
            }
    if (vars.empty()) throw BadParams("clause has no variables");
    Structure db(sig, static_cast<int>(vars.size()));
    for (auto& l : lits) {
        if (l.isEq || !l.neg) continue;
        Tuple t;
        for (auto& v : l.vars) t.push_back(index[v]);
        db.add_tuple(l.sym, t);
    }
    if (varOrder) *varOrder = vars;
    return db;
}

// ---------------------------------------------------------------------------
// Classifier

FragmentReport classify(const EsoSentence& s, const CnfOptions& opts) {
    FragmentReport r;
    PrenexCnf p = to_pcnf(s.matrix, opts);

    r.isFO = s.existentials.empty();

    r.isSNP = true;
    for (auto& [isForall, v] : p.prefix)
        if (!isForall) {
            r.isSNP = false;
            r.diagnostics["isSNP"] =
                "existential first-order variable " + v + " in the prefix";
            break;
        }

    r.isMonadic = true;
    for (auto& d : s.existentials)
        if (d.arity != 1) {
            r.isMonadic = false;
            r.diagnostics["isMonadic"] =
                "existential " + d.name + " has arity " +
                std::to_string(d.arity);
            break;
        }

    r.isMonotone = true;
    r.isEqualityFree = true;
    for (auto& clause : p.clauses)
        for (auto& l : clause) {
            if (l.isEq) {
                r.isEqualityFree = false;
                if (!r.diagnostics.count("isEqualityFree"))
                    r.diagnostics["isEqualityFree"] =
                        "equality literal in the matrix";
                if (!l.neg && r.isMonotone) {
                    r.isMonotone = false;
                    r.diagnostics["isMonotone"] = "positive equality literal";
                }
            } else if (!l.neg && s.inputSig.has(l.sym) && r.isMonotone) {
                r.isMonotone = false;
                r.diagnostics["isMonotone"] =
                    "positive occurrence of input symbol " + l.sym;
            }
        }

    // Connectedness: every clause's canonical database is Gaifman-connected.
    Signature full = s.full_signature();
    r.isConnected = r.isSNP;
    if (!r.isSNP) {
        r.diagnostics["isConnected"] = "not an SNP sentence";
    } else {
        for (auto& clause : p.clauses) {
            std::vector<std::string> vars;
            std::map<std::string, int> index;
            Structure db(full, 1);
            bool posEq = false;
            for (auto& l : clause) {
                if (l.isEq && !l.neg) posEq = true;
                for (auto& v : l.vars)
                    if (!index.count(v)) {
                        index[v] = static_cast<int>(vars.size());
                        vars.push_back(v);
                    }
            }
            if (posEq) {
                r.isConnected = false;
                r.diagnostics["isConnected"] =
                    "clause contains a positive equality";
                break;
            }
            db = Structure(full, std::max<int>(1, vars.size()));
            for (auto& l : clause) {
                if (l.isEq || !l.neg) continue;
                Tuple t;
                for (auto& v : l.vars) t.push_back(index[v]);
                db.add_tuple(l.sym, t);
            }
            if (connected_components(db).size() > 1) {
                r.isConnected = false;
                r.diagnostics["isConnected"] =
                    "a clause has a disconnected canonical database";
                break;
            }
        }
    }

    // Extensionality: each primed symbol occurs only in its R'(x) => R(x)
    // clause (plus, optionally, unit emptiness guards "not R'(x)"), and every
    // existential declares a verified pairing.
    std::set<std::string> universals;
    for (auto& [isForall, v] : p.prefix)
        if (isForall) universals.insert(v);
    r.isExtensional = true;
    for (auto& d : s.existentials) {
        if (!d.extendsSym) {
            r.isExtensional = false;
            r.diagnostics["isExtensional"] =
                "existential " + d.name + " extends no input symbol";
            continue;
        }
        const std::string& primed = *d.extendsSym;
        bool sawDesignated = false, verified = true;
        for (auto& clause : p.clauses) {
            bool mentions = false;
            for (auto& l : clause)
                if (!l.isEq && l.sym == primed) mentions = true;
            if (!mentions) continue;
            auto onDistinctUniversals = [&](const Literal& l) {
                std::set<std::string> distinct;
                for (auto& v : l.vars)
                    if (!universals.count(v) || !distinct.insert(v).second)
                        return false;
                return true;
            };
            // Unit emptiness guard {not primed(v)} is allowed anywhere.
            if (clause.size() == 1 && !clause[0].isEq && clause[0].neg &&
                clause[0].sym == primed && onDistinctUniversals(clause[0]))
                continue;
            // Otherwise the clause must be exactly {not primed(v), R(v)} on
            // distinct universals.
            bool good = clause.size() == 2;
            const Literal* negL = nullptr;
            const Literal* posL = nullptr;
            if (good)
                for (auto& l : clause) {
                    if (l.isEq) good = false;
                    else if (l.neg && l.sym == primed) negL = &l;
                    else if (!l.neg && l.sym == d.name) posL = &l;
                }
            good = good && negL && posL && negL->vars == posL->vars;
            if (good) good = onDistinctUniversals(*negL);
            if (!good) {
                verified = false;
                break;
            }
            sawDesignated = true;
        }
        if (verified && sawDesignated) {
            r.extensionalPairs.emplace_back(d.name, primed);
        } else {
            r.isExtensional = false;
            r.diagnostics["isExtensional"] =
                "symbol " + primed + (sawDesignated || !verified
                    ? " occurs outside its extension clause"
                    : " has no extension clause");
        }
    }
    if (!r.isExtensional) r.extensionalPairs.clear();
    return r;
}

// ---------------------------------------------------------------------------
// Relativization

FormulaPtr relativize(const FormulaPtr& phi, const FormulaPtr& psi) {
    if (!is_prenex(phi)) throw NotPrenex("relativize needs a prenex sentence");
    std::set<std::string> fv = free_vars(psi);
    if (fv.size() > 1)
        throw BadParams("relativizer must have at most one free variable");
    std::optional<std::string> hole;
    if (!fv.empty()) hole = *fv.begin();

    std::vector<std::pair<bool, std::vector<std::string>>> prefix;
    FormulaPtr cur = phi;
    while (cur->kind == FKind::Forall || cur->kind == FKind::Exists) {
        prefix.emplace_back(cur->kind == FKind::Forall, cur->vars);
        cur = cur->kids[0];
    }
    auto instance = [&](const std::string& v) {
        if (!hole) return psi;
        return subst_vars(psi, {{*hole, v}});
    };
    std::vector<FormulaPtr> ante, cons;
    for (auto& [isForall, vars] : prefix)
        for (auto& v : vars) {
            FormulaPtr g = instance(v);
            if (g->kind == FKind::True) continue;  // trivial relativizer
            (isForall ? ante : cons).push_back(g);
        }
    cons.push_back(cur);
    FormulaPtr body = f_implies(f_and(ante), f_and(cons));
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
        body = it->first ? f_forall(it->second, body)
                         : f_exists(it->second, body);
    return body;
}

}  // namespace eso
