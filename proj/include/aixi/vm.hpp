#pragma once

// A deterministic, step-budgeted chronological register machine.
//
// Encoding (MSB first, 3-bit opcode followed by fixed-width operands):
//
//   000          END   end of code; at run time ends the cycle and restarts at pc 0
//   001          RDO   r0 := primary input
//   010          RDS   r1 := 1 if secondary input is nonzero else 0
//   011          WRS   write symbols (r0, r1) now and suspend until the next cycle
//   100 r c      LDC   reg r := c            (r, c: 1 bit each)
//   101 r tt     JZ    if reg r == 0 goto instruction tt (2 bits, absolute)
//   110 r        INC   reg r += 1
//   111 d        MOV   move the tape head (d = 0 left, 1 right)
//
// Register r0 is an accumulator; r1 is the work-tape cell under the head.
// Decoding stops at the first END, so no valid code is a proper prefix of another,
// and the per-opcode weights sum to exactly 1 (the code is complete).
//
// Inputs per cycle: a policy reads (previous observation, previous reward); an
// environment reads (current action, current action). The symbols written at the
// end of a cycle are r0 and r1: an environment maps them to (observation r0 mod |O|,
// reward index r1 mod |R|), a policy to action r0 mod |Y|.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aixi/core.hpp"

namespace aixi::vm {

enum class opcode : std::uint8_t {
  end = 0,
  read_observation = 1,
  read_reward_sign = 2,
  write_symbol = 3,
  load_const = 4,
  jump_if_zero = 5,
  increment = 6,
  move_tape = 7,
};

struct instruction {
  opcode op = opcode::end;
  std::uint8_t reg = 0;  // LDC, JZ, INC; direction for MOV
  std::uint8_t arg = 0;  // LDC constant, JZ target

  friend bool operator==(const instruction&, const instruction&) = default;
};

inline constexpr std::size_t opcode_bits = 3;

inline std::size_t operand_bits(opcode op) noexcept {
  switch (op) {
    case opcode::load_const: return 2;
    case opcode::jump_if_zero: return 3;
    case opcode::increment:
    case opcode::move_tape: return 1;
    default: return 0;
  }
}

/// A decoded program. `bits` is exactly the consumed prefix ('0'/'1' characters).
class program {
 public:
  program() = default;
  program(std::string bits, std::vector<instruction> code) : bits_(std::move(bits)), code_(std::move(code)) {}

  [[nodiscard]] const std::string& bits() const noexcept { return bits_; }
  [[nodiscard]] std::size_t length_bits() const noexcept { return bits_.size(); }
  /// Instructions including the terminating END.
  [[nodiscard]] const std::vector<instruction>& code() const noexcept { return code_; }

  /// Bits padded with zeros to a whole number of hex digits. Decoding the padded
  /// string recovers the program because the code set is prefix-free.
  [[nodiscard]] std::string hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < bits_.size(); i += 4) {
      unsigned nibble = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        nibble <<= 1U;
        if (i + j < bits_.size() && bits_[i + j] == '1') nibble |= 1U;
      }
      out.push_back(digits[nibble]);
    }
    return out;
  }

  friend bool operator==(const program& a, const program& b) { return a.bits_ == b.bits_; }
  friend std::strong_ordering operator<=>(const program& a, const program& b) { return a.bits_ <=> b.bits_; }

 private:
  std::string bits_;
  std::vector<instruction> code_;
};

/// Decodes the longest valid prefix ending at the first END; nullopt on ill-formed or truncated input.
inline std::optional<program> decode(std::string_view bits) {
  std::size_t pos = 0;
  auto take = [&](std::size_t n) -> std::optional<unsigned> {
    if (pos + n > bits.size()) return std::nullopt;
    unsigned v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      char c = bits[pos + i];
      if (c != '0' && c != '1') return std::nullopt;
      v = (v << 1U) | (c == '1' ? 1U : 0U);
    }
    pos += n;
    return v;
  };
  std::vector<instruction> code;
  while (true) {
    auto op_bits = take(opcode_bits);
    if (!op_bits) return std::nullopt;
    instruction ins;
    ins.op = static_cast<opcode>(*op_bits);
    switch (ins.op) {
      case opcode::load_const: {
        auto operand = take(2);
        if (!operand) return std::nullopt;
        ins.reg = static_cast<std::uint8_t>(*operand >> 1U);
        ins.arg = static_cast<std::uint8_t>(*operand & 1U);
        break;
      }
      case opcode::jump_if_zero: {
        auto operand = take(3);
        if (!operand) return std::nullopt;
        ins.reg = static_cast<std::uint8_t>(*operand >> 2U);
        ins.arg = static_cast<std::uint8_t>(*operand & 3U);
        break;
      }
      case opcode::increment:
      case opcode::move_tape: {
        auto operand = take(1);
        if (!operand) return std::nullopt;
        ins.reg = static_cast<std::uint8_t>(*operand);
        break;
      }
      default: break;
    }
    code.push_back(ins);
    if (ins.op == opcode::end) break;
  }
  return program(std::string(bits.substr(0, pos)), std::move(code));
}

inline std::optional<program> decode_hex(std::string_view hex) {
  std::string bits;
  for (char c : hex) {
    unsigned v;
    if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
    else return std::nullopt;
    for (int b = 3; b >= 0; --b) bits.push_back(((v >> static_cast<unsigned>(b)) & 1U) ? '1' : '0');
  }
  return decode(bits);
}

namespace detail {

inline void append_bits(std::string& out, unsigned value, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) out.push_back(((value >> i) & 1U) ? '1' : '0');
}

inline std::string encode_instruction(const instruction& ins) {
  std::string out;
  append_bits(out, static_cast<unsigned>(ins.op), opcode_bits);
  switch (ins.op) {
    case opcode::load_const: append_bits(out, (ins.reg << 1U) | ins.arg, 2); break;
    case opcode::jump_if_zero: append_bits(out, (ins.reg << 2U) | ins.arg, 3); break;
    case opcode::increment:
    case opcode::move_tape: append_bits(out, ins.reg, 1); break;
    default: break;
  }
  return out;
}

/// Every encodable instruction, ordered by its bit pattern.
inline const std::vector<std::pair<std::string, instruction>>& instruction_table() {
  static const auto table = [] {
    std::vector<std::pair<std::string, instruction>> t;
    for (unsigned op = 0; op < 8; ++op) {
      auto o = static_cast<opcode>(op);
      unsigned variants = 1U << operand_bits(o);
      for (unsigned v = 0; v < variants; ++v) {
        instruction ins{o, 0, 0};
        if (o == opcode::load_const) {
          ins.reg = static_cast<std::uint8_t>(v >> 1U);
          ins.arg = static_cast<std::uint8_t>(v & 1U);
        } else if (o == opcode::jump_if_zero) {
          ins.reg = static_cast<std::uint8_t>(v >> 2U);
          ins.arg = static_cast<std::uint8_t>(v & 3U);
        } else if (o == opcode::increment || o == opcode::move_tape) {
          ins.reg = static_cast<std::uint8_t>(v);
        }
        t.emplace_back(encode_instruction(ins), ins);
      }
    }
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return t;
  }();
  return table;
}

inline void enumerate_from(std::string& prefix, std::vector<instruction>& code, std::size_t max_bits,
                           std::vector<program>& out) {
  for (const auto& [bits, ins] : instruction_table()) {
    if (prefix.size() + bits.size() > max_bits) continue;
    prefix += bits;
    code.push_back(ins);
    if (ins.op == opcode::end) out.emplace_back(prefix, code);
    else enumerate_from(prefix, code, max_bits, out);
    code.pop_back();
    prefix.resize(prefix.size() - bits.size());
  }
}

}  // namespace detail

/// Assembles the listing syntax produced by `disassemble` (";" or newlines separate
/// instructions; a missing trailing END is appended).
inline program assemble(std::string_view source) {
  std::string text(source);
  std::replace(text.begin(), text.end(), ';', '\n');
  std::istringstream lines(text);
  std::string bits;
  bool ended = false;
  for (std::string line; std::getline(lines, line);) {
    auto colon = line.find(':');
    if (colon != std::string::npos) line = line.substr(colon + 1);
    std::istringstream words(line);
    std::string mnemonic;
    if (!(words >> mnemonic)) continue;
    if (ended) throw structural_error("instructions after END");
    std::transform(mnemonic.begin(), mnemonic.end(), mnemonic.begin(), ::toupper);
    auto reg_operand = [&words]() -> std::uint8_t {
      std::string r;
      if (!(words >> r) || (r != "r0" && r != "r1")) throw structural_error("expected register r0 or r1");
      return r == "r1" ? 1 : 0;
    };
    auto small_int = [&words](unsigned limit) -> std::uint8_t {
      unsigned v;
      if (!(words >> v) || v >= limit) throw structural_error("operand out of range");
      return static_cast<std::uint8_t>(v);
    };
    instruction ins;
    if (mnemonic == "END") {
      ins.op = opcode::end;
      ended = true;
    } else if (mnemonic == "RDO") {
      ins.op = opcode::read_observation;
    } else if (mnemonic == "RDS") {
      ins.op = opcode::read_reward_sign;
    } else if (mnemonic == "WRS") {
      ins.op = opcode::write_symbol;
    } else if (mnemonic == "LDC") {
      ins.op = opcode::load_const;
      ins.reg = reg_operand();
      ins.arg = small_int(2);
    } else if (mnemonic == "JZ") {
      ins.op = opcode::jump_if_zero;
      ins.reg = reg_operand();
      ins.arg = small_int(4);
    } else if (mnemonic == "INC") {
      ins.op = opcode::increment;
      ins.reg = reg_operand();
    } else if (mnemonic == "MOV") {
      ins.op = opcode::move_tape;
      std::string d;
      words >> d;
      if (d == "L" || d == "l" || d == "-") ins.reg = 0;
      else if (d == "R" || d == "r" || d == "+") ins.reg = 1;
      else throw structural_error("MOV needs direction L or R");
    } else {
      throw structural_error("unknown mnemonic '" + mnemonic + "'");
    }
    bits += detail::encode_instruction(ins);
  }
  if (!ended) bits += detail::encode_instruction(instruction{opcode::end, 0, 0});
  auto p = decode(bits);
  if (!p) throw structural_error("assembled code does not decode");
  return *p;
}

/// Human-readable listing, one instruction per line.
inline std::string disassemble(const program& p) {
  std::ostringstream out;
  for (std::size_t i = 0; i < p.code().size(); ++i) {
    const auto& ins = p.code()[i];
    out << i << ": ";
    switch (ins.op) {
      case opcode::end: out << "END"; break;
      case opcode::read_observation: out << "RDO"; break;
      case opcode::read_reward_sign: out << "RDS"; break;
      case opcode::write_symbol: out << "WRS"; break;
      case opcode::load_const: out << "LDC r" << int(ins.reg) << ' ' << int(ins.arg); break;
      case opcode::jump_if_zero: out << "JZ r" << int(ins.reg) << ' ' << int(ins.arg); break;
      case opcode::increment: out << "INC r" << int(ins.reg); break;
      case opcode::move_tape: out << "MOV " << (ins.reg ? 'R' : 'L'); break;
    }
    out << '\n';
  }
  return out.str();
}

/// All valid programs of at most max_bits bits, in lexicographic code order.
inline std::vector<program> enumerate_programs(std::size_t max_bits) {
  std::vector<program> out;
  std::string prefix;
  std::vector<instruction> code;
  detail::enumerate_from(prefix, code, max_bits, out);
  return out;
}

struct run_budget {
  std::size_t steps_per_cycle = 64;
};

/// Persistent machine state; execution is incremental across cycles.
struct machine_state {
  std::int64_t acc = 0;
  std::deque<std::int64_t> tape{0};
  std::size_t head = 0;
  std::size_t pc = 0;
  std::uint64_t input_cursor = 0;
  std::uint64_t output_count = 0;
  /// Set after a timeout; a stopped machine times out immediately in every later cycle.
  bool stopped = false;

  [[nodiscard]] std::int64_t cell() const { return tape[head]; }

  friend bool operator==(const machine_state&, const machine_state&) = default;
};

struct cycle_output {
  std::int64_t r0 = 0;
  std::int64_t r1 = 0;
  std::size_t steps_used = 0;
  bool timed_out = false;
};

/// Runs one cycle: consumes one input pair and produces one pair of symbols, or times out.
inline cycle_output run_cycle(const program& p, machine_state& s, std::int64_t primary, std::int64_t secondary,
                              run_budget budget) {
  cycle_output out;
  ++s.input_cursor;
  if (s.stopped) {
    out.timed_out = true;
    return out;
  }
  const auto& code = p.code();
  const std::size_t end_index = code.size() - 1;
  while (true) {
    if (out.steps_used >= budget.steps_per_cycle) {
      s.stopped = true;
      out.timed_out = true;
      out.r0 = 0;
      out.r1 = 0;
      return out;
    }
    const instruction& ins = code[s.pc];
    ++out.steps_used;
    auto reg = [&s](std::uint8_t r) -> std::int64_t& { return r == 0 ? s.acc : s.tape[s.head]; };
    switch (ins.op) {
      case opcode::end:
        s.pc = 0;
        out.r0 = s.acc;
        out.r1 = s.cell();
        ++s.output_count;
        return out;
      case opcode::write_symbol:
        ++s.pc;
        out.r0 = s.acc;
        out.r1 = s.cell();
        ++s.output_count;
        return out;
      case opcode::read_observation:
        s.acc = primary;
        ++s.pc;
        break;
      case opcode::read_reward_sign:
        s.tape[s.head] = secondary != 0 ? 1 : 0;
        ++s.pc;
        break;
      case opcode::load_const:
        reg(ins.reg) = ins.arg;
        ++s.pc;
        break;
      case opcode::jump_if_zero:
        if (reg(ins.reg) == 0) s.pc = std::min<std::size_t>(ins.arg, end_index);
        else ++s.pc;
        break;
      case opcode::increment:
        ++reg(ins.reg);
        ++s.pc;
        break;
      case opcode::move_tape:
        if (ins.reg == 0) {
          if (s.head == 0) s.tape.push_front(0);
          else --s.head;
        } else {
          ++s.head;
          if (s.head == s.tape.size()) s.tape.push_back(0);
        }
        ++s.pc;
        break;
    }
  }
}

inline std::size_t symbol_mod(std::int64_t v, std::size_t n) {
  auto m = static_cast<std::int64_t>(n);
  return static_cast<std::size_t>(((v % m) + m) % m);
}

struct policy_step {
  action_symbol action;
  std::size_t steps_used = 0;
  bool timed_out = false;
};

/// One policy cycle: reads the previous percept (none in cycle 1), emits an action.
/// Timeout yields action 0.
inline policy_step policy_cycle(const program& p, machine_state& s, const std::optional<percept>& previous,
                                const alphabet& a, run_budget budget) {
  std::int64_t obs = previous ? previous->observation : 0;
  std::int64_t reward_sign = previous && previous->reward > 0 ? 1 : 0;
  auto out = run_cycle(p, s, obs, reward_sign, budget);
  if (out.timed_out) return {action_symbol{0}, out.steps_used, true};
  return {action_symbol{static_cast<std::uint32_t>(symbol_mod(out.r0, a.actions))}, out.steps_used, false};
}

struct env_step {
  percept perceived;
  std::size_t steps_used = 0;
  bool timed_out = false;
};

/// One environment cycle: reads the action, emits a percept. Timeout yields (r=0, o=0).
inline env_step env_cycle(const program& q, machine_state& s, action_symbol y, const alphabet& a,
                          run_budget budget) {
  auto v = static_cast<std::int64_t>(y.index);
  auto out = run_cycle(q, s, v, v, budget);
  if (out.timed_out) return {percept{a.rewards.front(), 0}, out.steps_used, true};
  percept x{a.rewards[symbol_mod(out.r1, a.rewards.size())],
            static_cast<std::uint32_t>(symbol_mod(out.r0, a.observations))};
  return {x, out.steps_used, false};
}

/// Replays q on h's actions. Returns q's state after h when every emitted percept
/// (the timeout percept included) matches h, nullopt otherwise.
inline std::optional<machine_state> replay_env(const program& q, const history& h, const alphabet& a,
                                               run_budget budget) {
  machine_state s;
  for (const auto& c : h.cycles()) {
    auto step = env_cycle(q, s, c.action, a, budget);
    if (!(step.perceived == c.perceived)) return std::nullopt;
  }
  return s;
}

/// The environments of `pool` that reproduce h (the set Q-hat of consistent environments).
inline std::vector<program> consistent_envs(const std::vector<program>& pool, const history& h, const alphabet& a,
                                            run_budget budget) {
  if (h.pending_action()) throw structural_error("consistent_envs needs a complete history");
  std::vector<program> out;
  for (const auto& q : pool)
    if (replay_env(q, h, a, budget)) out.push_back(q);
  return out;
}

/// Replays policy p over the percepts of h (ignoring h's actions) and returns the
/// action p emits in cycle |h|+1.
inline policy_step policy_action_after(const program& p, const history& h, const alphabet& a, run_budget budget) {
  machine_state s;
  std::optional<percept> previous;
  for (const auto& c : h.cycles()) {
    policy_cycle(p, s, previous, a, budget);
    previous = c.perceived;
  }
  return policy_cycle(p, s, previous, a, budget);
}

/// Percepts produced by q when fed a constant action; used to read q as a sequence generator.
inline std::vector<percept> env_sequence(const program& q, std::size_t n, const alphabet& a, run_budget budget,
                                         action_symbol input = action_symbol{0}) {
  machine_state s;
  std::vector<percept> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(env_cycle(q, s, input, a, budget).perceived);
  return out;
}

}  // namespace aixi::vm
