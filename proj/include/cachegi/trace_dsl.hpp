#pragma once

// A line-oriented loop-nest language whose execution emits a memory access
// stream. Programs stand in for real targets: each statement sits on its own
// line, so line edits map one-to-one onto statements.
//
//   param N                     integer bound at run time
//   array A 16384 4             name, element count, element size (1..8 bytes)
//   loop i 0 N                  i = lo .. hi-1 (bounds are affine, no spaces)
//   load A[j*128+i]             read element, add its value to `acc`
//   store A[i]                  write `acc` into the element
//   emit acc                    append an affine value (may use `acc`) to output
//   end                         closes the innermost loop
//
// Blank lines and `#` comments are ignored. Index and bound expressions must
// be affine: sums of integer multiples of variables plus a constant.
// Arrays are laid out contiguously in declaration order, each base aligned
// to 64 bytes, starting at address 0.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cachegi/cachesim.hpp"
#include "cachegi/text_util.hpp"

namespace cachegi {

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class TraceFault { out_of_bounds, access_limit, overflow, unbound_parameter };

class TraceRuntimeError : public std::runtime_error {
 public:
  TraceRuntimeError(TraceFault fault, const std::string& what) : std::runtime_error(what), fault_(fault) {}
  TraceFault fault() const noexcept { return fault_; }

 private:
  TraceFault fault_;
};

/// constant + sum(coef * variable). Terms are kept sorted by name with
/// non-zero coefficients, which makes the printed form canonical.
struct AffineExpr {
  struct Term {
    std::string name;
    std::size_t slot = 0;
    std::int64_t coef = 0;
    bool operator==(const Term& o) const { return name == o.name && coef == o.coef; }
  };
  std::int64_t constant = 0;
  std::vector<Term> terms;

  bool is_constant() const { return terms.empty(); }
  std::string str() const;
};

inline std::string AffineExpr::str() const {
  std::string out;
  for (const auto& t : terms) {
    if (t.coef < 0)
      out += '-';
    else if (!out.empty())
      out += '+';
    const std::int64_t mag = t.coef < 0 ? -t.coef : t.coef;
    if (mag != 1) out += std::to_string(mag) + "*";
    out += t.name;
  }
  if (constant != 0 || out.empty()) {
    if (constant >= 0 && !out.empty()) out += '+';
    out += std::to_string(constant);
  }
  return out;
}

struct ArrayDecl {
  std::string name;
  std::int64_t length = 0;
  std::uint32_t element_size = 4;
  std::uint64_t base = 0;
};

enum class StmtKind { loop, end, load, store, emit };

struct Statement {
  StmtKind kind = StmtKind::end;
  std::size_t line = 0;   // 1-based source line
  std::size_t array = 0;  // load/store
  std::size_t slot = 0;   // loop variable slot
  std::string var;        // loop variable name
  AffineExpr a;           // loop lo | index | emitted value
  AffineExpr b;           // loop hi
  std::size_t partner = 0;  // loop <-> matching end
};

struct TraceProgram {
  std::vector<std::string> parameters;  // slot i holds parameters[i]
  std::vector<ArrayDecl> arrays;
  std::vector<Statement> statements;
  std::size_t slot_count = 0;  // parameters + loop variables + acc
  std::size_t acc_slot = 0;
  // Declaration lines in source order, for the canonical form.
  std::vector<std::pair<std::size_t, std::string>> declarations;

  std::string canonical() const;
};

namespace detail {

inline bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline bool is_keyword(std::string_view s) {
  return s == "loop" || s == "end" || s == "load" || s == "store" || s == "emit" || s == "array" ||
         s == "param" || s == "acc";
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b, std::size_t line) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw TraceParseError(line, "integer overflow in expression");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b, std::size_t line) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw TraceParseError(line, "integer overflow in expression");
  return r;
}

// Recursive-descent parser producing an affine map name -> coefficient.
class ExprParser {
 public:
  using Lookup = std::optional<std::size_t> (*)(const void*, std::string_view);

  ExprParser(std::string_view text, std::size_t line, const void* ctx, Lookup lookup)
      : s_(text), line_(line), ctx_(ctx), lookup_(lookup) {}

  AffineExpr parse() {
    auto m = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_, 1)) + "'");
    // Structure errors (non-affine, malformed) take precedence over names.
    if (!unknown_.empty()) fail("undeclared variable '" + unknown_ + "'");
    AffineExpr out;
    out.constant = m.constant;
    for (const auto& [name, ts] : m.terms)
      if (ts.second != 0) out.terms.push_back({name, ts.first, ts.second});
    return out;
  }

 private:
  struct Map {
    std::int64_t constant = 0;
    std::map<std::string, std::pair<std::size_t, std::int64_t>, std::less<>> terms;
  };

  [[noreturn]] void fail(const std::string& what) const { throw TraceParseError(line_, what); }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  Map expr() {
    Map acc = term();
    for (;;) {
      skip();
      if (pos_ >= s_.size() || (s_[pos_] != '+' && s_[pos_] != '-')) return acc;
      const bool minus = s_[pos_++] == '-';
      Map rhs = term();
      if (minus) scale(rhs, -1);
      acc.constant = checked_add(acc.constant, rhs.constant, line_);
      for (const auto& [n, ts] : rhs.terms) {
        auto& dst = acc.terms[n];
        dst.first = ts.first;
        dst.second = checked_add(dst.second, ts.second, line_);
      }
    }
  }

  Map term() {
    Map acc = factor();
    for (;;) {
      skip();
      if (pos_ >= s_.size() || s_[pos_] != '*') return acc;
      ++pos_;
      Map rhs = factor();
      if (!acc.terms.empty() && !rhs.terms.empty()) fail("non-affine index: product of variables");
      if (acc.terms.empty()) std::swap(acc, rhs);
      // acc may carry variables; rhs is a constant.
      scale(acc, rhs.constant);
    }
  }

  void scale(Map& m, std::int64_t k) {
    m.constant = checked_mul(m.constant, k, line_);
    for (auto& [n, ts] : m.terms) ts.second = checked_mul(ts.second, k, line_);
  }

  Map factor() {
    skip();
    if (pos_ >= s_.size()) fail("expression ends unexpectedly");
    const char c = s_[pos_];
    if (c == '-') {
      ++pos_;
      Map m = factor();
      scale(m, -1);
      return m;
    }
    if (c == '(') {
      ++pos_;
      Map m = expr();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
      return m;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && is_ident_char(s_[end])) ++end;
      const auto lit = s_.substr(pos_, end - pos_);
      Map m;
      const auto [p, ec] = std::from_chars(lit.data(), lit.data() + lit.size(), m.constant);
      if (ec != std::errc() || p != lit.data() + lit.size()) fail("malformed literal '" + std::string(lit) + "'");
      pos_ = end;
      return m;
    }
    if (is_ident_start(c)) {
      std::size_t end = pos_;
      while (end < s_.size() && is_ident_char(s_[end])) ++end;
      const auto name = s_.substr(pos_, end - pos_);
      pos_ = end;
      const auto slot = lookup_(ctx_, name);
      if (!slot && unknown_.empty()) unknown_ = std::string(name);
      Map m;
      m.terms[std::string(name)] = {slot.value_or(0), 1};
      return m;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
  const void* ctx_;
  Lookup lookup_;
  std::string unknown_;
};

struct ParseState {
  std::map<std::string, std::size_t, std::less<>> params;
  std::vector<std::pair<std::string, std::size_t>> scope;  // active loop variables
  bool allow_acc = false;
  std::size_t acc_slot = 0;

  static std::optional<std::size_t> lookup(const void* self, std::string_view name) {
    const auto* st = static_cast<const ParseState*>(self);
    if (name == "acc") {
      if (st->allow_acc) return st->acc_slot;
      return std::nullopt;
    }
    for (auto it = st->scope.rbegin(); it != st->scope.rend(); ++it)
      if (it->first == name) return it->second;
    if (auto p = st->params.find(name); p != st->params.end()) return p->second;
    return std::nullopt;
  }
};

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool valid_ident(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char) && !is_keyword(s);
}

}  // namespace detail

inline TraceProgram parse_trace_program(std::string_view text) {
  TraceProgram prog;
  detail::ParseState st;
  std::map<std::string, std::size_t, std::less<>> array_index;
  std::vector<std::size_t> open_loops;
  std::vector<std::string> loop_var_names;  // per slot, after parameters
  std::uint64_t next_base = 0;

  // Parameters are declared before use; their slots come first, loop
  // variables after. Slots are assigned in a first pass so that loop slots
  // never collide with parameter slots.
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::size_t lineno = 0, start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view l = text.substr(start, nl - start);
      if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
      ++lineno;
      if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
      if (!detail::trim(l).empty()) lines.emplace_back(lineno, std::string(detail::trim(l)));
      if (nl == text.size()) break;
      start = nl + 1;
    }
  }
  for (const auto& [lineno, l] : lines) {
    const auto tok = detail::split_ws(l);
    if (tok[0] == "param") {
      if (tok.size() != 2 || !detail::valid_ident(tok[1]))
        throw TraceParseError(lineno, "expected 'param <name>'");
      if (st.params.count(tok[1])) throw TraceParseError(lineno, "parameter '" + std::string(tok[1]) + "' redeclared");
      st.params.emplace(std::string(tok[1]), prog.parameters.size());
      prog.parameters.emplace_back(tok[1]);
    }
  }
  std::size_t next_slot = prog.parameters.size();
  // Re-collect parameters in order of appearance as the parse proceeds, so
  // that a use before the declaration line is still an error.
  std::map<std::string, std::size_t, std::less<>> all_params = std::move(st.params);
  st.params.clear();

  for (const auto& [lineno, l] : lines) {
    const auto tok = detail::split_ws(l);
    const std::string_view kw = tok[0];
    const auto rest = detail::trim(std::string_view(l).substr(kw.size()));

    const auto parse_expr = [&](std::string_view e, bool allow_acc) {
      st.allow_acc = allow_acc;
      return detail::ExprParser(e, lineno, &st, &detail::ParseState::lookup).parse();
    };
    const auto parse_access = [&](StmtKind kind) {
      const auto lb = rest.find('[');
      if (lb == std::string_view::npos || rest.empty() || rest.back() != ']')
        throw TraceParseError(lineno, "expected '" + std::string(kw) + " <array>[<index>]'");
      const auto name = detail::trim(rest.substr(0, lb));
      Statement s;
      s.kind = kind;
      s.line = lineno;
      s.a = parse_expr(rest.substr(lb + 1, rest.size() - lb - 2), false);
      const auto it = array_index.find(name);
      if (it == array_index.end()) throw TraceParseError(lineno, "undeclared array '" + std::string(name) + "'");
      s.array = it->second;
      prog.statements.push_back(std::move(s));
    };

    if (kw == "param") {
      if (!open_loops.empty()) throw TraceParseError(lineno, "parameters must be declared outside loops");
      st.params.emplace(std::string(tok[1]), all_params.at(std::string(tok[1])));
      prog.declarations.emplace_back(prog.statements.size(), "param " + std::string(tok[1]));
    } else if (kw == "array") {
      if (!open_loops.empty()) throw TraceParseError(lineno, "arrays must be declared outside loops");
      if (tok.size() != 4 || !detail::valid_ident(tok[1]))
        throw TraceParseError(lineno, "expected 'array <name> <length> <element-size>'");
      if (array_index.count(tok[1])) throw TraceParseError(lineno, "array '" + std::string(tok[1]) + "' redeclared");
      ArrayDecl d;
      d.name = std::string(tok[1]);
      auto r1 = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), d.length);
      auto r2 = std::from_chars(tok[3].data(), tok[3].data() + tok[3].size(), d.element_size);
      if (r1.ec != std::errc() || r1.ptr != tok[2].data() + tok[2].size() || d.length <= 0)
        throw TraceParseError(lineno, "malformed array length '" + std::string(tok[2]) + "'");
      if (r2.ec != std::errc() || r2.ptr != tok[3].data() + tok[3].size() || d.element_size < 1 || d.element_size > 8)
        throw TraceParseError(lineno, "element size must be 1..8, got '" + std::string(tok[3]) + "'");
      if (d.length > (std::int64_t{1} << 32)) throw TraceParseError(lineno, "array too large");
      d.base = next_base;
      next_base = (d.base + static_cast<std::uint64_t>(d.length) * d.element_size + 63) / 64 * 64;
      array_index.emplace(d.name, prog.arrays.size());
      prog.declarations.emplace_back(prog.statements.size(), "array " + d.name + " " + std::to_string(d.length) +
                                                                 " " + std::to_string(d.element_size));
      prog.arrays.push_back(std::move(d));
    } else if (kw == "loop") {
      if (tok.size() != 4) throw TraceParseError(lineno, "expected 'loop <var> <lo> <hi>'");
      if (!detail::valid_ident(tok[1])) throw TraceParseError(lineno, "bad loop variable '" + std::string(tok[1]) + "'");
      if (detail::ParseState::lookup(&st, tok[1]))
        throw TraceParseError(lineno, "loop variable '" + std::string(tok[1]) + "' shadows a visible name");
      Statement s;
      s.kind = StmtKind::loop;
      s.line = lineno;
      s.var = std::string(tok[1]);
      s.a = parse_expr(tok[2], false);
      s.b = parse_expr(tok[3], false);
      s.slot = next_slot++;
      loop_var_names.push_back(s.var);
      st.scope.emplace_back(s.var, s.slot);
      open_loops.push_back(prog.statements.size());
      prog.statements.push_back(std::move(s));
    } else if (kw == "end") {
      if (tok.size() != 1) throw TraceParseError(lineno, "unexpected tokens after 'end'");
      if (open_loops.empty()) throw TraceParseError(lineno, "unbalanced 'end'");
      Statement s;
      s.kind = StmtKind::end;
      s.line = lineno;
      s.partner = open_loops.back();
      prog.statements[open_loops.back()].partner = prog.statements.size();
      open_loops.pop_back();
      st.scope.pop_back();
      prog.statements.push_back(std::move(s));
    } else if (kw == "load") {
      parse_access(StmtKind::load);
    } else if (kw == "store") {
      parse_access(StmtKind::store);
    } else if (kw == "emit") {
      if (rest.empty()) throw TraceParseError(lineno, "expected 'emit <expr>'");
      st.acc_slot = next_slot;  // provisional; fixed up below
      Statement s;
      s.kind = StmtKind::emit;
      s.line = lineno;
      s.a = parse_expr(rest, true);
      prog.statements.push_back(std::move(s));
    } else {
      throw TraceParseError(lineno, "unknown statement '" + std::string(kw) + "'");
    }
  }
  if (!open_loops.empty())
    throw TraceParseError(prog.statements[open_loops.back()].line, "unbalanced 'loop' without 'end'");

  prog.acc_slot = next_slot;
  prog.slot_count = next_slot + 1;
  for (auto& s : prog.statements)
    if (s.kind == StmtKind::emit)
      for (auto& t : s.a.terms)
        if (t.name == "acc") t.slot = prog.acc_slot;
  return prog;
}

inline std::string TraceProgram::canonical() const {
  std::string out;
  std::size_t d = 0;
  const auto flush_decls = [&](std::size_t upto) {
    while (d < declarations.size() && declarations[d].first <= upto) out += declarations[d++].second + "\n";
  };
  for (std::size_t i = 0; i < statements.size(); ++i) {
    flush_decls(i);
    const auto& s = statements[i];
    switch (s.kind) {
      case StmtKind::loop:
        out += "loop " + s.var + " " + s.a.str() + " " + s.b.str() + "\n";
        break;
      case StmtKind::end:
        out += "end\n";
        break;
      case StmtKind::load:
      case StmtKind::store:
        out += (s.kind == StmtKind::load ? "load " : "store ") + arrays[s.array].name + "[" + s.a.str() + "]\n";
        break;
      case StmtKind::emit:
        out += "emit " + s.a.str() + "\n";
        break;
    }
  }
  flush_decls(statements.size());
  return out;
}

using Bindings = std::map<std::string, std::int64_t, std::less<>>;

struct TraceLimits {
  std::uint64_t access_limit = 100'000'000;
  // Loops without memory traffic still cost time; cap executed statements.
  std::uint64_t statement_limit() const { return access_limit > UINT64_MAX / 16 ? UINT64_MAX : access_limit * 16 + 1024; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::int64_t eval(const AffineExpr& e, const std::vector<std::int64_t>& slots) {
  std::int64_t v = e.constant;
  for (const auto& t : e.terms) {
    std::int64_t p;
    if (__builtin_mul_overflow(t.coef, slots[t.slot], &p) || __builtin_add_overflow(v, p, &v))
      throw TraceRuntimeError(TraceFault::overflow, "arithmetic overflow evaluating '" + e.str() + "'");
  }
  return v;
}

}  // namespace detail

/// Initial value of element `index` of array number `ordinal`, derived from
/// the run's `seed` binding (0 when absent).
inline std::int64_t initial_cell_value(std::int64_t seed, std::size_t ordinal, std::int64_t index) {
  const auto h = detail::splitmix64(static_cast<std::uint64_t>(seed) * 0x100000001b3ULL ^
                                    detail::splitmix64(ordinal * 0x9e37ULL + static_cast<std::uint64_t>(index)));
  return static_cast<std::int64_t>(h % 1000);
}

/// Executes `prog`, passing each memory access to `sink` in program order.
/// Returns the emitted values.
template <typename Sink>
std::vector<std::int64_t> execute_trace_program(const TraceProgram& prog, const Bindings& bindings,
                                                const TraceLimits& limits, Sink&& sink) {
  std::vector<std::int64_t> slots(prog.slot_count, 0);
  for (std::size_t i = 0; i < prog.parameters.size(); ++i) {
    const auto it = bindings.find(prog.parameters[i]);
    if (it == bindings.end())
      throw TraceRuntimeError(TraceFault::unbound_parameter, "parameter '" + prog.parameters[i] + "' is not bound");
    slots[i] = it->second;
  }
  const auto seed_it = bindings.find("seed");
  const std::int64_t seed = seed_it == bindings.end() ? 0 : seed_it->second;

  std::vector<std::vector<std::int64_t>> cells(prog.arrays.size());
  for (std::size_t a = 0; a < prog.arrays.size(); ++a) {
    cells[a].resize(static_cast<std::size_t>(prog.arrays[a].length));
    for (std::int64_t k = 0; k < prog.arrays[a].length; ++k)
      cells[a][static_cast<std::size_t>(k)] = initial_cell_value(seed, a, k);
  }

  std::vector<std::int64_t> hi(prog.statements.size(), 0);
  std::vector<std::int64_t> emitted;
  std::int64_t& acc = slots[prog.acc_slot];
  std::uint64_t accesses = 0, executed = 0;
  const std::uint64_t stmt_limit = limits.statement_limit();

  for (std::size_t pc = 0; pc < prog.statements.size();) {
    const Statement& s = prog.statements[pc];
    if (++executed > stmt_limit)
      throw TraceRuntimeError(TraceFault::access_limit, "statement budget exceeded");
    switch (s.kind) {
      case StmtKind::loop: {
        const auto lo = detail::eval(s.a, slots);
        hi[pc] = detail::eval(s.b, slots);
        if (lo >= hi[pc]) {
          pc = s.partner + 1;
        } else {
          slots[s.slot] = lo;
          ++pc;
        }
        break;
      }
      case StmtKind::end: {
        const Statement& head = prog.statements[s.partner];
        if (++slots[head.slot] < hi[s.partner])
          pc = s.partner + 1;
        else
          ++pc;
        break;
      }
      case StmtKind::load:
      case StmtKind::store: {
        const ArrayDecl& arr = prog.arrays[s.array];
        const auto idx = detail::eval(s.a, slots);
        if (idx < 0 || idx >= arr.length)
          throw TraceRuntimeError(TraceFault::out_of_bounds, "line " + std::to_string(s.line) + ": index " +
                                                                 std::to_string(idx) + " outside " + arr.name);
        if (++accesses > limits.access_limit)
          throw TraceRuntimeError(TraceFault::access_limit, "access limit of " + std::to_string(limits.access_limit) +
                                                                " exceeded");
        auto& cell = cells[s.array][static_cast<std::size_t>(idx)];
        const Access a{s.kind == StmtKind::load ? AccessKind::read : AccessKind::write,
                       arr.base + static_cast<std::uint64_t>(idx) * arr.element_size, arr.element_size};
        sink(a);
        if (s.kind == StmtKind::load) {
          if (__builtin_add_overflow(acc, cell, &acc))
            throw TraceRuntimeError(TraceFault::overflow, "accumulator overflow");
        } else {
          cell = acc;
        }
        ++pc;
        break;
      }
      case StmtKind::emit:
        emitted.push_back(detail::eval(s.a, slots));
        ++pc;
        break;
    }
  }
  return emitted;
}

struct TraceRun {
  std::vector<std::int64_t> emitted;
  std::vector<Access> accesses;
};

inline TraceRun run_trace_program(const TraceProgram& prog, const Bindings& bindings, std::uint64_t access_limit) {
  if (access_limit < 1) throw std::invalid_argument("access_limit must be >= 1");
  TraceRun run;
  run.emitted = execute_trace_program(prog, bindings, TraceLimits{access_limit},
                                      [&](const Access& a) { run.accesses.push_back(a); });
  return run;
}

/// Parses `name=value` pairs separated by whitespace or newlines.
inline Bindings parse_bindings(std::string_view text) {
  Bindings b;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      const auto item = text.substr(i, j - i);
      const auto eq = item.find('=');
      std::int64_t v = 0;
      if (eq == std::string_view::npos || eq == 0) throw std::invalid_argument("malformed binding '" + std::string(item) + "'");
      const auto val = item.substr(eq + 1);
      const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
      if (ec != std::errc() || p != val.data() + val.size())
        throw std::invalid_argument("malformed binding value '" + std::string(item) + "'");
      b[std::string(item.substr(0, eq))] = v;
    }
    i = j;
  }
  return b;
}

}  // namespace cachegi
