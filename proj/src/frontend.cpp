#include "praline/program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace praline {

bool Atom::ground() const {
    for (auto& t : args)
        if (t.var) return false;
    return true;
}

std::string Atom::str() const {
    if (args.empty()) return pred;
    std::string s = pred + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) s += ",";
        s += args[i].text;
    }
    return s + ")";
}

std::string fmt_prob(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    // prefer the short form when it round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char b2[64];
        std::snprintf(b2, sizeof b2, "%.*g", prec, p);
        if (std::strtod(b2, nullptr) == p) return b2;
    }
    return buf;
}

namespace {

enum class Tok { Ident, Var, Number, String, LParen, RParen, Comma, Dot, ColonColon, Implies, Bar, Not, End };

struct Token {
    Tok kind;
    std::string text;
    Loc loc;
};

const char* tok_name(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Var: return "variable";
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::ColonColon: return "'::'";
        case Tok::Implies: return "':-'";
        case Tok::Bar: return "'|'";
        case Tok::Not: return "'\\+'";
        case Tok::End: return "end of input";
    }
    return "?";
}

std::string where(Loc l) { return std::to_string(l.line) + ":" + std::to_string(l.col); }

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip();
            Loc loc{line_, col_};
            if (i_ >= s_.size()) {
                out.push_back({Tok::End, "", loc});
                return out;
            }
            char c = s_[i_];
            if (c == '(') { adv(); out.push_back({Tok::LParen, "(", loc}); continue; }
            if (c == ')') { adv(); out.push_back({Tok::RParen, ")", loc}); continue; }
            if (c == ',') { adv(); out.push_back({Tok::Comma, ",", loc}); continue; }
            if (c == '|') { adv(); out.push_back({Tok::Bar, "|", loc}); continue; }
            if (c == '\\' && peek(1) == '+') { adv(); adv(); out.push_back({Tok::Not, "\\+", loc}); continue; }
            if (c == ':' && peek(1) == ':') { adv(); adv(); out.push_back({Tok::ColonColon, "::", loc}); continue; }
            if (c == ':' && peek(1) == '-') { adv(); adv(); out.push_back({Tok::Implies, ":-", loc}); continue; }
            if (c == '.' && !std::isdigit(static_cast<unsigned char>(peek(1)))) {
                adv();
                out.push_back({Tok::Dot, ".", loc});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-') {
                std::string t;
                if (c == '-') { t += c; adv(); }
                while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' ||
                                          s_[i_] == 'e' || s_[i_] == 'E' ||
                                          ((s_[i_] == '-' || s_[i_] == '+') && (t.back() == 'e' || t.back() == 'E')))) {
                    // a trailing '.' followed by non-digit ends the clause
                    if (s_[i_] == '.' && !std::isdigit(static_cast<unsigned char>(peek(1)))) break;
                    t += s_[i_];
                    adv();
                }
                if (t == "-") throw SyntaxError(where(loc) + ": unexpected '-'", loc);
                out.push_back({Tok::Number, t, loc});
                continue;
            }
            if (c == '"' || c == '\'') {
                char q = c;
                std::string t(1, q);
                adv();
                while (i_ < s_.size() && s_[i_] != q) { t += s_[i_]; adv(); }
                if (i_ >= s_.size()) throw SyntaxError(where(loc) + ": unterminated string", loc);
                t += q;
                adv();
                out.push_back({Tok::String, t, loc});
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string t;
                while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
                    t += s_[i_];
                    adv();
                }
                bool var = std::isupper(static_cast<unsigned char>(t[0])) || t[0] == '_';
                out.push_back({var ? Tok::Var : Tok::Ident, t, loc});
                continue;
            }
            throw SyntaxError(where(loc) + ": unexpected character '" + std::string(1, c) + "'", loc);
        }
    }

private:
    char peek(size_t k) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }
    void adv() {
        if (s_[i_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++i_;
    }
    void skip() {
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (std::isspace(static_cast<unsigned char>(c))) { adv(); continue; }
            if (c == '%' || (c == '/' && peek(1) == '/')) {
                while (i_ < s_.size() && s_[i_] != '\n') adv();
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                adv(); adv();
                while (i_ < s_.size() && !(s_[i_] == '*' && peek(1) == '/')) adv();
                if (i_ < s_.size()) { adv(); adv(); }
                continue;
            }
            break;
        }
    }

    const std::string& s_;
    size_t i_ = 0;
    int line_ = 1, col_ = 1;
};

struct Literal {
    Atom atom;
    bool neg = false;
};

class Parser {
public:
    explicit Parser(std::vector<Token> t) : t_(std::move(t)) {}

    Program run() {
        while (cur().kind != Tok::End) clause();
        validate();
        return std::move(p_);
    }

private:
    const Token& cur() const { return t_[k_]; }
    const Token& ahead(size_t d) const { return t_[std::min(k_ + d, t_.size() - 1)]; }

    [[noreturn]] void fail(const std::string& what) {
        const Token& t = cur();
        throw SyntaxError(where(t.loc) + ": expected " + what + ", found " +
                              (t.text.empty() ? std::string(tok_name(t.kind)) : "'" + t.text + "'"),
                          t.loc);
    }

    Token expect(Tok k) {
        if (cur().kind != k) fail(tok_name(k));
        return t_[k_++];
    }

    double number(const Token& t) {
        double v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            throw SyntaxError(where(t.loc) + ": malformed number '" + t.text + "'", t.loc);
        return v;
    }

    double prob(const Token& t) {
        double v = number(t);
        if (!(v >= 0.0 && v <= 1.0))
            throw ProbabilityRangeError(where(t.loc) + ": probability " + t.text + " outside [0,1]", t.loc);
        return v;
    }

    Term term() {
        const Token& t = cur();
        if (t.kind == Tok::Var || t.kind == Tok::Ident || t.kind == Tok::Number || t.kind == Tok::String) {
            ++k_;
            return Term{t.text, t.kind == Tok::Var};
        }
        fail("a term");
    }

    Atom atom() {
        if (cur().kind != Tok::Ident) fail("a predicate name");
        Token name = t_[k_++];
        Atom a;
        a.pred = name.text;
        a.loc = name.loc;
        if (cur().kind == Tok::LParen) {
            ++k_;
            a.args.push_back(term());
            while (cur().kind == Tok::Comma) { ++k_; a.args.push_back(term()); }
            expect(Tok::RParen);
        }
        return a;
    }

    Literal literal() {
        Literal l;
        if (cur().kind == Tok::Not) { ++k_; l.neg = true; }
        l.atom = atom();
        return l;
    }

    std::vector<Literal> literals() {
        std::vector<Literal> v{literal()};
        while (cur().kind == Tok::Comma) { ++k_; v.push_back(literal()); }
        return v;
    }

    std::vector<Atom> atom_args() {
        expect(Tok::LParen);
        std::vector<Atom> v{atom()};
        while (cur().kind == Tok::Comma) { ++k_; v.push_back(atom()); }
        expect(Tok::RParen);
        return v;
    }

    void clause() {
        Loc loc = cur().loc;
        if (cur().kind == Tok::Ident && ahead(1).kind == Tok::LParen &&
            (cur().text == "query" || cur().text == "corr")) {
            std::string kw = cur().text;
            ++k_;
            auto args = atom_args();
            expect(Tok::Dot);
            if (kw == "query") {
                if (args.size() != 1) throw SyntaxError(where(loc) + ": query takes one atom", loc);
                p_.queries.push_back(args[0]);
            } else {
                std::vector<std::string> g;
                for (auto& a : args) {
                    require_ground(a);
                    g.push_back(a.str());
                }
                p_.corr_groups.push_back(g);
                refs_.push_back({g, loc});
            }
            return;
        }

        bool has_prob = false;
        double p = 1.0;
        if (cur().kind == Tok::Number) {
            Token num = t_[k_++];
            expect(Tok::ColonColon);
            if (cur().kind == Tok::Var && cur().text == "Class" && ahead(1).kind == Tok::LParen) {
                double k = number(num);
                if (k != static_cast<int>(k) || k < 0)
                    throw SyntaxError(where(num.loc) + ": class id must be a non-negative integer", num.loc);
                ++k_;
                auto args = atom_args();
                expect(Tok::Dot);
                auto& cls = p_.explicit_classes[static_cast<int>(k)];
                std::vector<std::string> g;
                for (auto& a : args) {
                    require_ground(a);
                    cls.push_back(a.str());
                    g.push_back(a.str());
                }
                refs_.push_back({g, loc});
                return;
            }
            p = prob(num);
            has_prob = true;
        }
        (void)has_prob;

        Atom head = atom();
        if (cur().kind == Tok::Implies) {
            ++k_;
            auto body = literals();
            expect(Tok::Dot);
            Rule r;
            r.head = head;
            r.prob = p;
            r.loc = loc;
            for (auto& l : body) (l.neg ? r.neg : r.pos).push_back(l.atom);
            r.index = static_cast<int>(p_.rules.size()) + 1;
            p_.rules.push_back(std::move(r));
            return;
        }
        require_ground(head);
        InputProbDecl d;
        d.target = head.str();
        d.prob = p;
        d.loc = loc;
        input_preds_.emplace(head.pred, head.loc);
        declare(head);
        if (cur().kind == Tok::Bar) {
            ++k_;
            for (auto& l : literals()) {
                require_ground(l.atom);
                input_preds_.emplace(l.atom.pred, l.atom.loc);
                d.given.emplace_back(l.atom.str(), l.neg);
                declare(l.atom);
            }
        }
        expect(Tok::Dot);
        p_.input_probs.push_back(std::move(d));
    }

    void require_ground(const Atom& a) {
        if (!a.ground()) throw SyntaxError(where(a.loc) + ": input fact '" + a.str() + "' must be ground", a.loc);
    }

    void declare(const Atom& a) {
        std::string f = a.str();
        if (p_.fact_id.count(f)) return;
        p_.fact_id[f] = static_cast<int>(p_.facts.size());
        p_.facts.push_back(f);
        p_.fact_atoms.push_back(a);
    }

    void validate() {
        for (auto& [g, loc] : refs_)
            for (auto& f : g)
                if (!p_.fact_id.count(f))
                    throw UndeclaredFactError(where(loc) + ": fact '" + f + "' has no probability declaration", loc);
        for (auto& r : p_.rules) {
            auto it = input_preds_.find(r.head.pred);
            if (it != input_preds_.end())
                throw SyntaxError(where(r.loc) + ": predicate '" + r.head.pred +
                                      "' is declared as input at " + where(it->second) + " and derived by a rule",
                                  r.loc);
            std::set<std::string> bound;
            for (auto& a : r.pos)
                for (auto& t : a.args)
                    if (t.var) bound.insert(t.text);
            auto check = [&](const Atom& a, const char* what) {
                for (auto& t : a.args)
                    if (t.var && t.text != "_" && !bound.count(t.text))
                        throw SyntaxError(where(a.loc) + ": variable " + t.text + " in " + what +
                                              " is not bound by a positive body literal",
                                          a.loc);
                    else if (t.var && t.text == "_" && std::string(what) == "head")
                        throw SyntaxError(where(a.loc) + ": anonymous variable in rule head", a.loc);
            };
            check(r.head, "head");
            for (auto& a : r.neg) check(a, "negated literal");
        }
    }

    std::vector<Token> t_;
    size_t k_ = 0;
    Program p_;
    std::vector<std::pair<std::vector<std::string>, Loc>> refs_;
    std::map<std::string, Loc> input_preds_;
};

struct DSU {
    std::vector<int> p;
    explicit DSU(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) {
        a = find(a), b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);
        p[b] = a;
    }
};

}  // namespace

Program infer_correlation_classes(Program p) {
    size_t n = p.facts.size();
    DSU dsu(n);
    auto id = [&](const std::string& f) {
        int i = p.fact(f);
        if (i < 0) throw UndeclaredFactError("fact '" + f + "' has no probability declaration", {});
        return i;
    };
    std::vector<int> explicit_k(n, -1);
    for (auto& [k, mem] : p.explicit_classes) {
        for (auto& f : mem) {
            int i = id(f);
            if (explicit_k[i] >= 0 && explicit_k[i] != k)
                throw ConflictError("fact '" + f + "' is placed in classes " + std::to_string(explicit_k[i]) +
                                        " and " + std::to_string(k),
                                    {});
            explicit_k[i] = k;
            dsu.unite(id(mem.front()), i);
        }
    }
    for (auto& g : p.corr_groups)
        for (auto& f : g) dsu.unite(id(g.front()), id(f));
    for (auto& d : p.input_probs)
        for (auto& g : d.given) dsu.unite(id(d.target), id(g.first));

    std::map<int, std::vector<int>> comp;  // root (smallest member) -> members in order
    for (size_t i = 0; i < n; ++i) comp[dsu.find(static_cast<int>(i))].push_back(static_cast<int>(i));

    p.classes.clear();
    p.class_of.assign(n, -1);
    int next_id = 0;
    for (auto& [k, mem] : p.explicit_classes) next_id = std::max(next_id, k + 1);
    for (auto& [root, mem] : comp) {
        CorrelationClass c;
        std::set<int> ks;
        for (int m : mem)
            if (explicit_k[m] >= 0) ks.insert(explicit_k[m]);
        if (ks.size() == 1)
            c.id = *ks.begin();
        else if (mem.size() == 1 && ks.empty())
            c.id = -1;
        else
            c.id = next_id++;  // merged through conditionals / corr
        for (int m : mem) {
            c.index[p.facts[m]] = static_cast<int>(c.members.size());
            c.members.push_back(p.facts[m]);
            p.class_of[m] = static_cast<int>(p.classes.size());
        }
        p.classes.push_back(std::move(c));
    }
    return p;
}

Program parse(const std::string& source) {
    Lexer lx(source);
    Parser ps(lx.run());
    return infer_correlation_classes(ps.run());
}

Program parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'", {});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string print(const Program& p) {
    std::ostringstream o;
    for (auto& d : p.input_probs) {
        o << fmt_prob(d.prob) << "::" << d.target;
        for (size_t i = 0; i < d.given.size(); ++i)
            o << (i ? ", " : " | ") << (d.given[i].second ? "\\+" : "") << d.given[i].first;
        o << ".\n";
    }
    for (auto& g : p.corr_groups) {
        o << "corr(";
        for (size_t i = 0; i < g.size(); ++i) o << (i ? ", " : "") << g[i];
        o << ").\n";
    }
    for (auto& [k, mem] : p.explicit_classes)
        for (auto& f : mem) o << k << "::Class(" << f << ").\n";
    for (auto& r : p.rules) {
        o << fmt_prob(r.prob) << "::" << r.head.str() << " :- ";
        bool first = true;
        for (auto& a : r.pos) { o << (first ? "" : ", ") << a.str(); first = false; }
        for (auto& a : r.neg) { o << (first ? "" : ", ") << "\\+" << a.str(); first = false; }
        o << ".\n";
    }
    for (auto& q : p.queries) o << "query(" << q.str() << ").\n";
    return o.str();
}

}  // namespace praline
