#pragma once

#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fidopt/blackbox.hpp"
#include "fidopt/core.hpp"

namespace fidopt {

namespace detail {

// Parses one whitespace-separated token as an extended real. "inf" and its
// signed variants are accepted; NaN and trailing garbage are not.
inline std::optional<ExtReal> parse_ext_token(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return std::nullopt;
  if (v != v) return std::nullopt;
  return ExtReal(v);
}

// Splits the first nonempty line of a child's output into f, c_1..c_m and
// an optional trailing cost. Any token failing to parse, or a token count
// other than m+1 or m+2, rejects the whole line.
struct ParsedLine {
  ExtReal f = ExtReal::not_computed();
  std::vector<ExtReal> c;
  std::optional<double> reported_time;
};

inline std::optional<ParsedLine> parse_output_line(const std::string& text,
                                                   std::size_t m) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (fields >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != m + 1 && tokens.size() != m + 2) return std::nullopt;

    ParsedLine out;
    std::vector<ExtReal> values;
    values.reserve(tokens.size());
    for (const std::string& t : tokens) {
      const auto v = parse_ext_token(t);
      if (!v) return std::nullopt;
      values.push_back(*v);
    }
    out.f = values[0];
    out.c.assign(values.begin() + 1, values.begin() + 1 + m);
    if (tokens.size() == m + 2) {
      const ExtReal cost = values.back();
      if (!cost.finite() || cost.value() < 0.0) return std::nullopt;
      out.reported_time = cost.value();
    }
    return out;
  }
  return std::nullopt;
}

}  // namespace detail

// Adapter running an external executable through the file protocol: the
// point is written as one decimal value per line, the fidelity is appended
// as the final command-line argument, and the child prints a single line
// "f c_1 .. c_m" (an extra trailing token, when present, is taken as the
// virtual cost; otherwise the child's wall-clock time is charged).
// Nonzero exit or an unparseable line maps to an evaluation failure with
// all outputs infinite and the elapsed time still charged.
class ExecBlackbox final : public MultiFidelityBlackbox {
 public:
  ExecBlackbox(std::string command, BlackboxDescriptor desc)
      : command_(std::move(command)), desc_(std::move(desc)) {
    desc_.validate();
    if (command_.empty())
      throw std::invalid_argument("ExecBlackbox: empty command");
  }

  const BlackboxDescriptor& descriptor() const override { return desc_; }

  EvalOutput evaluate(const TrialPoint& x, double fidelity) const override {
    if (x.size() != desc_.dimension)
      throw std::invalid_argument("ExecBlackbox: point dimension mismatch");

    const std::string point_path = write_point_file(x);
    char fid_str[64];
    std::snprintf(fid_str, sizeof(fid_str), "%.17g", fidelity);
    const std::string cmdline = command_ + " " + point_path + " " + fid_str;

    const auto start = std::chrono::steady_clock::now();
    std::string captured;
    int status = -1;
    if (FILE* pipe = ::popen(cmdline.c_str(), "r")) {
      char buf[4096];
      std::size_t got = 0;
      while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0)
        captured.append(buf, got);
      status = ::pclose(pipe);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    ::unlink(point_path.c_str());

    const std::size_t m = desc_.constraints.count;
    EvalOutput out;
    out.fidelity = fidelity;
    out.time = wall;

    std::optional<detail::ParsedLine> parsed;
    if (status == 0) parsed = detail::parse_output_line(captured, m);
    if (!parsed) {
      out.failed = true;
      out.f = ExtReal::infinity();
      out.c.assign(m, ExtReal::infinity());
      return out;
    }

    out.f = parsed->f;
    out.c = std::move(parsed->c);
    if (parsed->reported_time) out.time = *parsed->reported_time;

    for (std::size_t j : desc_.constraints.a_priori) {
      if (out.c[j].computed() && out.c[j] > ExtReal(0.0)) {
        out.apriori_violated = true;
        break;
      }
    }
    // The screening fidelity answers only the a-priori questions; whatever
    // the child printed for the rest is not meaningful there.
    if (fidelity == 0.0) {
      out.f = ExtReal::not_computed();
      for (std::size_t j = 0; j < m; ++j)
        if (!desc_.constraints.is_a_priori(j)) out.c[j] = ExtReal::not_computed();
    }
    return out;
  }

 private:
  std::string write_point_file(const TrialPoint& x) const {
    char path[] = "/tmp/fidopt_point_XXXXXX";
    const int fd = ::mkstemp(path);
    if (fd < 0)
      throw std::runtime_error("ExecBlackbox: cannot create point file");
    std::string body;
    char line[64];
    for (double v : x) {
      std::snprintf(line, sizeof(line), "%.17g\n", v);
      body += line;
    }
    std::size_t off = 0;
    while (off < body.size()) {
      const ssize_t put = ::write(fd, body.data() + off, body.size() - off);
      if (put < 0) {
        ::close(fd);
        ::unlink(path);
        throw std::runtime_error("ExecBlackbox: cannot write point file");
      }
      off += static_cast<std::size_t>(put);
    }
    ::close(fd);
    return std::string(path);
  }

  std::string command_;
  BlackboxDescriptor desc_;
};

}  // namespace fidopt
