#include "catree/history.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace catree {

namespace {

constexpr std::string_view kOpNames[] = {"insert", "remove", "lookup", "range"};

template <typename T>
T parse_number(std::string_view s, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("history line " + std::to_string(line) +
                             ": bad number '" + std::string{s} + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) return out;
    s.remove_prefix(pos + 1);
  }
}

}  // namespace

std::string_view to_string(OpKind op) noexcept {
  return kOpNames[static_cast<std::size_t>(op)];
}

OpKind parse_op_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kOpNames); ++i)
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  throw std::invalid_argument("unknown operation '" + std::string{name} + "'");
}

History merge_logs(std::vector<History> logs) {
  History out;
  for (auto& log : logs)
    out.insert(out.end(), std::make_move_iterator(log.begin()),
               std::make_move_iterator(log.end()));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.invoke_ns < b.invoke_ns;
  });
  return out;
}

void write_tsv(std::ostream& out, const History& history) {
  for (const auto& e : history) {
    out << e.thread << '\t' << to_string(e.op) << '\t' << e.arg;
    if (e.op == OpKind::range) out << ',' << e.arg_hi;
    out << '\t' << e.invoke_ns << '\t' << e.return_ns << '\t';
    if (e.op != OpKind::range) {
      out << (e.present ? '1' : '0');
    } else if (e.keys.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < e.keys.size(); ++i) out << (i ? "," : "") << e.keys[i];
    }
    out << '\n';
  }
}

History read_tsv(std::istream& in) {
  History history;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 6)
      throw std::runtime_error("history line " + std::to_string(n) + ": expected 6 fields");
    HistoryEvent e;
    e.thread = parse_number<std::uint32_t>(fields[0], n);
    try {
      e.op = parse_op_kind(fields[1]);
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error("history line " + std::to_string(n) + ": " + err.what());
    }
    const auto args = split(fields[2], ',');
    if (args.size() != (e.op == OpKind::range ? 2U : 1U))
      throw std::runtime_error("history line " + std::to_string(n) + ": bad arguments");
    e.arg = parse_number<std::int64_t>(args[0], n);
    if (e.op == OpKind::range) e.arg_hi = parse_number<std::int64_t>(args[1], n);
    e.invoke_ns = parse_number<std::int64_t>(fields[3], n);
    e.return_ns = parse_number<std::int64_t>(fields[4], n);
    if (e.op != OpKind::range) {
      if (fields[5] != "0" && fields[5] != "1")
        throw std::runtime_error("history line " + std::to_string(n) + ": bad result");
      e.present = fields[5] == "1";
    } else if (fields[5] != "-") {
      for (auto k : split(fields[5], ',')) e.keys.push_back(parse_number<std::int64_t>(k, n));
    }
    history.push_back(std::move(e));
  }
  return history;
}

}  // namespace catree
