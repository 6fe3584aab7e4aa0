#pragma once

// A miniature structural-Verilog interpreter for the adder modules this
// project emits: continuous assigns over scalar nets with ~ & ^ | and
// parentheses, bit-selects on the a/b input buses, and instantiations of the
// emitted prefix_cell module (whose own assigns are read from the same
// source text, not hardcoded). Deliberately independent of the circuit
// evaluator so it can catch wiring bugs in the emitter.

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace verilog_sim {

struct Expr {
    enum Kind { Ref, Index, Not, And, Or, Xor } kind;
    std::string name;               // Ref/Index
    int index = -1;                 // Index
    std::shared_ptr<Expr> lhs, rhs; // Not uses lhs only
};

using ExprPtr = std::shared_ptr<Expr>;

class ExprParser {
  public:
    explicit ExprParser(std::string text) : text_(std::move(text)) {}

    ExprPtr parse() {
        auto e = parse_or();
        skip_ws();
        if (pos_ != text_.size())
            throw std::runtime_error("trailing characters in expression: " + text_);
        return e;
    }

  private:
    ExprPtr parse_or() {
        auto e = parse_xor();
        while (peek('|')) {
            ++pos_;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Or;
            node->lhs = std::move(e);
            node->rhs = parse_xor();
            e = std::move(node);
        }
        return e;
    }

    ExprPtr parse_xor() {
        auto e = parse_and();
        while (peek('^')) {
            ++pos_;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Xor;
            node->lhs = std::move(e);
            node->rhs = parse_and();
            e = std::move(node);
        }
        return e;
    }

    ExprPtr parse_and() {
        auto e = parse_unary();
        while (peek('&')) {
            ++pos_;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::And;
            node->lhs = std::move(e);
            node->rhs = parse_unary();
            e = std::move(node);
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (peek('~')) {
            ++pos_;
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Not;
            node->lhs = parse_unary();
            return node;
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        skip_ws();
        if (peek('(')) {
            ++pos_;
            auto e = parse_or();
            skip_ws();
            if (!peek(')'))
                throw std::runtime_error("missing ) in expression: " + text_);
            ++pos_;
            return e;
        }
        std::string ident = parse_ident();
        skip_ws();
        auto node = std::make_shared<Expr>();
        if (peek('[')) {
            ++pos_;
            node->kind = Expr::Index;
            node->name = ident;
            node->index = parse_number();
            skip_ws();
            if (!peek(']'))
                throw std::runtime_error("missing ] in expression: " + text_);
            ++pos_;
        } else {
            node->kind = Expr::Ref;
            node->name = ident;
        }
        return node;
    }

    std::string parse_ident() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start)
            throw std::runtime_error("expected identifier in expression: " + text_);
        return text_.substr(start, pos_ - start);
    }

    int parse_number() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ == start)
            throw std::runtime_error("expected number in expression: " + text_);
        return std::stoi(text_.substr(start, pos_ - start));
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    std::string text_;
    size_t pos_ = 0;
};

struct Assign {
    std::string lhs;
    int lhs_index = -1; // for sum[i]
    ExprPtr rhs;
};

/// Parses the emitted source and evaluates the top adder module for given
/// operand values.
class AdderSim {
  public:
    explicit AdderSim(const std::string& source) {
        std::vector<std::string> lines;
        size_t start = 0;
        while (start <= source.size()) {
            size_t end = source.find('\n', start);
            if (end == std::string::npos)
                end = source.size();
            lines.push_back(source.substr(start, end - start));
            if (end == source.size())
                break;
            start = end + 1;
        }

        std::string current_module;
        std::map<std::string, std::vector<Assign>> module_assigns;
        std::vector<std::pair<std::string, std::map<std::string, std::string>>> instances;

        for (const std::string& raw : lines) {
            std::string line = strip(raw);
            if (line.empty() || line.rfind("//", 0) == 0)
                continue;
            if (line.rfind("module ", 0) == 0) {
                current_module = strip(line.substr(7, line.find_first_of(" (", 7) - 7));
                if (top_module_.empty())
                    top_module_ = current_module;
                continue;
            }
            if (line.rfind("endmodule", 0) == 0) {
                current_module.clear();
                continue;
            }
            if (line.rfind("assign ", 0) == 0) {
                size_t eq = line.find('=');
                size_t semi = line.rfind(';');
                if (eq == std::string::npos || semi == std::string::npos)
                    throw std::runtime_error("malformed assign: " + line);
                std::string lhs = strip(line.substr(7, eq - 7));
                Assign a;
                size_t bracket = lhs.find('[');
                if (bracket != std::string::npos) {
                    a.lhs = strip(lhs.substr(0, bracket));
                    a.lhs_index = std::stoi(lhs.substr(bracket + 1));
                } else {
                    a.lhs = lhs;
                }
                ExprParser parser(line.substr(eq + 1, semi - eq - 1));
                a.rhs = parser.parse();
                module_assigns[current_module].push_back(std::move(a));
                continue;
            }
            // instantiation: <module> <name> (.port(net), ...);
            size_t paren = line.find('(');
            if (paren != std::string::npos && line.find('.') != std::string::npos &&
                current_module == top_module_) {
                std::string head = strip(line.substr(0, paren));
                size_t space = head.find(' ');
                if (space == std::string::npos)
                    continue; // port list of the module header
                std::string submodule = head.substr(0, space);
                std::map<std::string, std::string> conns;
                size_t pos = paren;
                while ((pos = line.find('.', pos)) != std::string::npos) {
                    size_t open = line.find('(', pos);
                    size_t close = line.find(')', open);
                    conns[strip(line.substr(pos + 1, open - pos - 1))] =
                        strip(line.substr(open + 1, close - open - 1));
                    pos = close;
                }
                instances.emplace_back(submodule, std::move(conns));
            }
        }

        // elaborate: top-level assigns as-is, instance assigns substituted
        for (const Assign& a : module_assigns[top_module_])
            add_assign(a);
        for (const auto& [submodule, conns] : instances) {
            auto it = module_assigns.find(submodule);
            if (it == module_assigns.end())
                throw std::runtime_error("instantiated module not in source: " + submodule);
            for (const Assign& a : it->second) {
                Assign mapped;
                auto conn = conns.find(a.lhs);
                if (conn == conns.end())
                    throw std::runtime_error("unconnected output port " + a.lhs);
                mapped.lhs = conn->second;
                mapped.rhs = substitute(*a.rhs, conns);
                add_assign(mapped);
            }
        }
    }

    /// Evaluates sum and cout for the given operands.
    std::pair<uint64_t, bool> run(uint64_t a, uint64_t b, int width) {
        a_ = a;
        b_ = b;
        cache_.clear();
        uint64_t sum = 0;
        for (int i = 0; i < width; ++i)
            sum |= static_cast<uint64_t>(value_of("sum", i)) << i;
        return {sum, value_of("cout", -1)};
    }

    size_t instance_count(const std::string& module_name, const std::string& source) const {
        size_t count = 0, pos = 0;
        std::string needle = module_name + " ";
        while ((pos = source.find(needle, pos)) != std::string::npos) {
            // skip the module definition itself
            if (pos < 7 || source.compare(pos - 7, 7, "module ") != 0)
                ++count;
            pos += needle.size();
        }
        return count;
    }

  private:
    static std::string strip(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }

    void add_assign(const Assign& a) {
        std::string key = a.lhs_index >= 0 ? a.lhs + "[" + std::to_string(a.lhs_index) + "]" : a.lhs;
        if (nets_.count(key))
            throw std::runtime_error("net driven twice: " + key);
        nets_[key] = a.rhs;
    }

    static ExprPtr substitute(const Expr& e, const std::map<std::string, std::string>& conns) {
        auto out = std::make_shared<Expr>();
        out->kind = e.kind;
        out->index = e.index;
        if (e.kind == Expr::Ref) {
            auto it = conns.find(e.name);
            out->name = it != conns.end() ? it->second : e.name;
        } else {
            out->name = e.name;
        }
        if (e.lhs)
            out->lhs = substitute(*e.lhs, conns);
        if (e.rhs)
            out->rhs = substitute(*e.rhs, conns);
        return out;
    }

    bool value_of(const std::string& name, int index) {
        if (name == "a")
            return (a_ >> index) & 1;
        if (name == "b")
            return (b_ >> index) & 1;
        std::string key = index >= 0 ? name + "[" + std::to_string(index) + "]" : name;
        auto cached = cache_.find(key);
        if (cached != cache_.end())
            return cached->second;
        auto it = nets_.find(key);
        if (it == nets_.end())
            throw std::runtime_error("undriven net: " + key);
        bool v = eval(*it->second);
        cache_[key] = v;
        return v;
    }

    bool eval(const Expr& e) {
        switch (e.kind) {
        case Expr::Ref: return value_of(e.name, -1);
        case Expr::Index: return value_of(e.name, e.index);
        case Expr::Not: return !eval(*e.lhs);
        case Expr::And: return eval(*e.lhs) && eval(*e.rhs);
        case Expr::Or: return eval(*e.lhs) || eval(*e.rhs);
        case Expr::Xor: return eval(*e.lhs) != eval(*e.rhs);
        }
        return false;
    }

    std::string top_module_;
    std::map<std::string, ExprPtr> nets_;
    std::map<std::string, bool> cache_;
    uint64_t a_ = 0, b_ = 0;
};

} // namespace verilog_sim
