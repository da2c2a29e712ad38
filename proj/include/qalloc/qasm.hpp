// Copyright 2026 The qalloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Parser for the OpenQASM 2.0 subset used by the allocation pipeline:
// header, qreg/creg declarations, gate statements in the
// {u1,u2,u3,rx,ry,rz,h,x,y,z,s,sdg,t,tdg,cx} basis, measure and barrier
// (both dropped from the gate list). The accepted grammar is documented in
// docs/qasm_subset.md. No gate definitions, no conditionals, no opaque
// gates.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/error.hpp"

namespace qalloc {

namespace detail {

enum class TokenKind {
  identifier,
  number,
  string,
  symbol,  // one of ( ) [ ] { } , ; + - * / ^ and ->
  end
};

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  double value = 0.0;  // for number tokens
  int line = 1;
  int column = 1;
};

class QasmLexer {
 public:
  explicit QasmLexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws_and_comments();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= src_.size()) return tok;  // end

    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok.kind = TokenKind::identifier;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        tok.text += advance();
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      tok.kind = TokenKind::number;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '.'))
        tok.text += advance();
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        tok.text += advance();
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
          tok.text += advance();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          tok.text += advance();
      }
      const char* begin = tok.text.data();
      const char* end = begin + tok.text.size();
      auto [ptr, ec] = std::from_chars(begin, end, tok.value);
      if (ec != std::errc{} || ptr != end)
        throw ParseError("malformed number '" + tok.text + "'", tok.line,
                         tok.column);
      return tok;
    }
    if (c == '"') {
      tok.kind = TokenKind::string;
      advance();
      while (pos_ < src_.size() && src_[pos_] != '"') tok.text += advance();
      if (pos_ >= src_.size())
        throw ParseError("unterminated string literal", tok.line, tok.column);
      advance();  // closing quote
      return tok;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      tok.kind = TokenKind::symbol;
      tok.text = "->";
      advance();
      advance();
      return tok;
    }
    static constexpr std::string_view kSymbols = "()[]{},;+-*/^";
    if (kSymbols.find(c) != std::string_view::npos) {
      tok.kind = TokenKind::symbol;
      tok.text = advance();
      return tok;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_,
                     column_);
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_ws_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

struct GateSignature {
  int num_parameters;
  int num_qubits;
};

// The accepted basis. Arity-3+ gates from qelib1 are listed so they can be
// rejected with a pre-decomposition hint instead of "unknown gate".
inline const std::map<std::string, GateSignature>& basis_gates() {
  static const std::map<std::string, GateSignature> table = {
      {"u1", {1, 1}}, {"u2", {2, 1}},  {"u3", {3, 1}}, {"rx", {1, 1}},
      {"ry", {1, 1}}, {"rz", {1, 1}},  {"h", {0, 1}},  {"x", {0, 1}},
      {"y", {0, 1}},  {"z", {0, 1}},   {"s", {0, 1}},  {"sdg", {0, 1}},
      {"t", {0, 1}},  {"tdg", {0, 1}}, {"cx", {0, 2}},
  };
  return table;
}

inline const std::map<std::string, int>& known_wide_gates() {
  static const std::map<std::string, int> table = {
      {"ccx", 3}, {"cswap", 3}, {"c3x", 4}, {"c4x", 5}};
  return table;
}

class QasmParser {
 public:
  explicit QasmParser(std::string_view src) : lexer_(src) { consume(); }

  QuantumCircuit parse() {
    expect_identifier("OPENQASM");
    const Token version = expect(TokenKind::number, "format version");
    if (version.text != "2" && version.text.rfind("2.", 0) != 0)
      throw ParseError("unsupported OpenQASM version '" + version.text +
                           "' (expected 2.x)",
                       version.line, version.column);
    expect_symbol(";");

    while (current_.kind != TokenKind::end) statement();

    if (registers_.empty())
      throw ParseError("no qreg declared", current_.line, current_.column);
    circuit_.n_c = total_qubits_;
    return std::move(circuit_);
  }

 private:
  struct Register {
    int offset;
    int size;
  };

  void statement() {
    const Token tok = expect(TokenKind::identifier, "statement");
    const std::string& kw = tok.text;
    if (kw == "include") {
      const Token file = expect(TokenKind::string, "include file name");
      if (file.text != "qelib1.inc")
        throw ParseError("only include \"qelib1.inc\" is supported", file.line,
                         file.column);
      expect_symbol(";");
    } else if (kw == "qreg") {
      declare_register(tok, /*quantum=*/true);
    } else if (kw == "creg") {
      declare_register(tok, /*quantum=*/false);
    } else if (kw == "measure") {
      // Dropped: readout does not contribute to the gate counts.
      operand(/*allow_broadcast=*/true);
      expect_symbol("->");
      classical_operand();
      expect_symbol(";");
    } else if (kw == "barrier") {
      do {
        operand(/*allow_broadcast=*/true);
      } while (accept_symbol(","));
      expect_symbol(";");
    } else if (kw == "gate" || kw == "opaque") {
      throw ParseError("gate definitions are not supported", tok.line,
                       tok.column);
    } else if (kw == "if") {
      throw ParseError("conditional statements are not supported", tok.line,
                       tok.column);
    } else {
      gate_statement(tok);
    }
  }

  void declare_register(const Token& kw, bool quantum) {
    const Token name = expect(TokenKind::identifier, "register name");
    expect_symbol("[");
    const Token size = expect(TokenKind::number, "register size");
    expect_symbol("]");
    expect_symbol(";");
    const int n = static_cast<int>(size.value);
    if (n < 1 || size.value != n)
      throw ParseError("register size must be a positive integer", size.line,
                       size.column);
    if (!quantum) return;  // creg accepted, not tracked
    if (registers_.count(name.text))
      throw ParseError("duplicate qreg '" + name.text + "'", name.line,
                       name.column);
    // Multiple qregs are flattened into one index space in declaration order.
    registers_[name.text] = {total_qubits_, n};
    total_qubits_ += n;
    (void)kw;
  }

  void gate_statement(const Token& name) {
    const auto& basis = basis_gates();
    const auto it = basis.find(name.text);
    if (it == basis.end()) {
      const auto& wide = known_wide_gates();
      if (const auto wit = wide.find(name.text); wit != wide.end())
        throw ParseError("gate '" + name.text + "' acts on " +
                             std::to_string(wit->second) +
                             " qubits; decompose to the {1,2}-qubit basis "
                             "before allocation",
                         name.line, name.column);
      throw ParseError("gate '" + name.text + "' is outside the supported "
                       "basis {u1,u2,u3,rx,ry,rz,h,x,y,z,s,sdg,t,tdg,cx}",
                       name.line, name.column);
    }
    const GateSignature sig = it->second;

    std::vector<double> parameters;
    if (accept_symbol("(")) {
      if (!accept_symbol(")")) {
        do {
          parameters.push_back(expression());
        } while (accept_symbol(","));
        expect_symbol(")");
      }
    }
    if (static_cast<int>(parameters.size()) != sig.num_parameters)
      throw ParseError("gate '" + name.text + "' expects " +
                           std::to_string(sig.num_parameters) +
                           " parameter(s), got " +
                           std::to_string(parameters.size()),
                       name.line, name.column);

    std::vector<Operand> operands;
    do {
      operands.push_back(operand(/*allow_broadcast=*/sig.num_qubits == 1));
    } while (accept_symbol(","));
    expect_symbol(";");

    if (static_cast<int>(operands.size()) != sig.num_qubits)
      throw ParseError("gate '" + name.text + "' expects " +
                           std::to_string(sig.num_qubits) + " operand(s), got " +
                           std::to_string(operands.size()),
                       name.line, name.column);

    if (sig.num_qubits == 1 && operands[0].broadcast) {
      // `h q;` applies the gate to every qubit of the register.
      const Register reg = registers_.at(operands[0].reg);
      for (int q = 0; q < reg.size; ++q)
        circuit_.gates.push_back({name.text, {reg.offset + q}, parameters});
      return;
    }
    std::vector<int> indices;
    for (const auto& op : operands) indices.push_back(op.index);
    if (indices.size() == 2 && indices[0] == indices[1])
      throw ParseError("gate '" + name.text + "' operands must be distinct",
                       name.line, name.column);
    circuit_.gates.push_back({name.text, std::move(indices), std::move(parameters)});
  }

  struct Operand {
    std::string reg;
    int index = -1;       // absolute flattened index when !broadcast
    bool broadcast = false;
  };

  Operand operand(bool allow_broadcast) {
    const Token name = expect(TokenKind::identifier, "qubit operand");
    const auto it = registers_.find(name.text);
    if (it == registers_.end())
      throw ParseError("unknown register '" + name.text + "'", name.line,
                       name.column);
    Operand op;
    op.reg = name.text;
    if (accept_symbol("[")) {
      const Token idx = expect(TokenKind::number, "qubit index");
      expect_symbol("]");
      const int i = static_cast<int>(idx.value);
      if (i < 0 || idx.value != i || i >= it->second.size)
        throw ParseError("index " + idx.text + " out of range for qreg '" +
                             name.text + "[" +
                             std::to_string(it->second.size) + "]'",
                         idx.line, idx.column);
      op.index = it->second.offset + i;
      return op;
    }
    if (!allow_broadcast)
      throw ParseError("register broadcast is not supported here; index '" +
                           name.text + "' explicitly",
                       name.line, name.column);
    op.broadcast = true;
    return op;
  }

  // Target of a measure; classical registers are not tracked, so any
  // identifier with an optional index is accepted.
  void classical_operand() {
    expect(TokenKind::identifier, "classical operand");
    if (accept_symbol("[")) {
      expect(TokenKind::number, "bit index");
      expect_symbol("]");
    }
  }

  // Parameter expressions: numbers, pi, + - * / ^, unary sign, parentheses.
  double expression() {
    double value = term();
    while (current_.kind == TokenKind::symbol &&
           (current_.text == "+" || current_.text == "-")) {
      const bool add = current_.text == "+";
      consume();
      const double rhs = term();
      value = add ? value + rhs : value - rhs;
    }
    return value;
  }

  double term() {
    double value = factor();
    while (current_.kind == TokenKind::symbol &&
           (current_.text == "*" || current_.text == "/")) {
      const bool mul = current_.text == "*";
      const Token op = current_;
      consume();
      const double rhs = factor();
      if (!mul && rhs == 0.0)
        throw ParseError("division by zero in parameter expression", op.line,
                         op.column);
      value = mul ? value * rhs : value / rhs;
    }
    return value;
  }

  double factor() {
    if (current_.kind == TokenKind::symbol && current_.text == "-") {
      consume();
      return -factor();
    }
    if (current_.kind == TokenKind::symbol && current_.text == "+") {
      consume();
      return factor();
    }
    double value = primary();
    if (current_.kind == TokenKind::symbol && current_.text == "^") {
      consume();
      value = std::pow(value, factor());
    }
    return value;
  }

  double primary() {
    if (current_.kind == TokenKind::number) {
      const double v = current_.value;
      consume();
      return v;
    }
    if (current_.kind == TokenKind::identifier && current_.text == "pi") {
      consume();
      return std::numbers::pi;
    }
    if (current_.kind == TokenKind::symbol && current_.text == "(") {
      consume();
      const double v = expression();
      expect_symbol(")");
      return v;
    }
    throw ParseError("expected number, 'pi' or '(' in parameter expression",
                     current_.line, current_.column);
  }

  Token expect(TokenKind kind, const std::string& what) {
    if (current_.kind != kind)
      throw ParseError("expected " + what, current_.line, current_.column);
    Token tok = current_;
    consume();
    return tok;
  }

  void expect_identifier(const std::string& text) {
    if (current_.kind != TokenKind::identifier || current_.text != text)
      throw ParseError("expected '" + text + "'", current_.line,
                       current_.column);
    consume();
  }

  void expect_symbol(const std::string& text) {
    if (current_.kind != TokenKind::symbol || current_.text != text)
      throw ParseError("expected '" + text + "'", current_.line,
                       current_.column);
    consume();
  }

  bool accept_symbol(const std::string& text) {
    if (current_.kind == TokenKind::symbol && current_.text == text) {
      consume();
      return true;
    }
    return false;
  }

  void consume() { current_ = lexer_.next(); }

  QasmLexer lexer_;
  Token current_;
  QuantumCircuit circuit_;
  std::map<std::string, Register> registers_;
  int total_qubits_ = 0;
};

}  // namespace detail

/// Parses the restricted OpenQASM 2.0 subset. `measure` and `barrier`
/// statements are accepted and dropped; n_c is the total declared qreg size
/// (multiple qregs concatenated in declaration order).
inline QuantumCircuit parse_qasm(std::string_view text,
                                 std::string name = "") {
  detail::QasmParser parser(text);
  QuantumCircuit circuit = parser.parse();
  circuit.name = std::move(name);
  validate(circuit);
  return circuit;
}

/// Canonical renderer for the retained gate subset: one flattened qreg,
/// parameters printed with full round-trip precision. Satisfies
/// parse(render(parse(text))) == parse(text).
inline std::string render_qasm(const QuantumCircuit& circuit) {
  std::string out;
  out += "OPENQASM 2.0;\n";
  out += "include \"qelib1.inc\";\n";
  out += "qreg q[" + std::to_string(circuit.n_c) + "];\n";
  for (const auto& gate : circuit.gates) {
    out += gate.name;
    if (!gate.parameters.empty()) {
      out += '(';
      for (std::size_t p = 0; p < gate.parameters.size(); ++p) {
        if (p > 0) out += ',';
        std::array<char, 32> buf{};
        auto [ptr, ec] =
            std::to_chars(buf.data(), buf.data() + buf.size(),
                          gate.parameters[p]);
        out.append(buf.data(), ptr);
        (void)ec;
      }
      out += ')';
    }
    out += ' ';
    for (std::size_t q = 0; q < gate.operands.size(); ++q) {
      if (q > 0) out += ',';
      out += "q[" + std::to_string(gate.operands[q]) + "]";
    }
    out += ";\n";
  }
  return out;
}

}  // namespace qalloc
