#include "sde/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sde/error.hpp"

namespace sde {
namespace {

bool is_json_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Replaces invalid UTF-8 with U+FFFD. `valid` counts decoded code points.
std::string sanitize_utf8(std::string_view in, std::size_t& valid) {
  static constexpr const char* kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  valid = 0;
  std::size_t i = 0;
  while (i < in.size()) {
    const auto b0 = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len != 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (ok) {
      static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
      ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      out.append(in.substr(i, len));
      ++valid;
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

bool looks_like_float(std::string_view tok) {
  std::size_t i = 0;
  if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
  std::size_t int_digits = 0;
  while (i < tok.size() && is_digit(tok[i])) ++i, ++int_digits;
  bool fractional = false;
  std::size_t frac_digits = 0;
  if (i < tok.size() && tok[i] == '.') {
    fractional = true;
    ++i;
    while (i < tok.size() && is_digit(tok[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return false;
  bool exponent = false;
  if (i < tok.size() && (tok[i] == 'e' || tok[i] == 'E')) {
    exponent = true;
    ++i;
    if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < tok.size() && is_digit(tok[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == tok.size() && (fractional || exponent);
}

std::string reformat_float_lexeme(std::string_view lexeme) {
  const std::string buf(lexeme);
  const double v = std::strtod(buf.c_str(), nullptr);
  if (!std::isfinite(v)) return buf;
  return format_float(v);
}

/// Recursive-descent JSON reader that emits canonical text while keeping
/// integer lexemes intact.
class Canonicalizer {
 public:
  explicit Canonicalizer(std::string_view s) : s_(s) {}

  std::optional<std::string> run() {
    std::string out;
    skip_ws();
    if (!value(&out)) return std::nullopt;
    skip_ws();
    if (pos_ != s_.size()) return std::nullopt;
    return out;
  }

  // Scans a top-level object for `key`; returns the raw value span.
  std::optional<std::string_view> member(std::string_view key) {
    skip_ws();
    if (!eat('{')) return std::nullopt;
    skip_ws();
    if (eat('}')) return std::nullopt;
    while (true) {
      skip_ws();
      std::string decoded;
      if (!string_lit(nullptr, &decoded)) return std::nullopt;
      skip_ws();
      if (!eat(':')) return std::nullopt;
      skip_ws();
      const std::size_t start = pos_;
      if (!value(nullptr)) return std::nullopt;
      if (decoded == key) return s_.substr(start, pos_ - start);
      skip_ws();
      if (eat(',')) continue;
      return std::nullopt;
    }
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && is_json_ws(s_[pos_])) ++pos_;
  }

  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool eat_word(std::string_view w) {
    if (s_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }

  bool value(std::string* out) {
    if (++depth_ > 512) return false;
    bool ok = false;
    if (pos_ >= s_.size()) {
      ok = false;
    } else if (s_[pos_] == '{') {
      ok = object(out);
    } else if (s_[pos_] == '[') {
      ok = array(out);
    } else if (s_[pos_] == '"') {
      ok = string_lit(out, nullptr);
    } else {
      ok = scalar(out);
    }
    --depth_;
    return ok;
  }

  bool scalar(std::string* out) {
    for (std::string_view w : {"true", "false", "null", "NaN", "Infinity", "-Infinity"}) {
      if (eat_word(w)) {
        if (out) out->append(w);
        return true;
      }
    }
    return number(out);
  }

  bool number(std::string* out) {
    const std::size_t start = pos_;
    eat('-');
    if (pos_ >= s_.size()) return false;
    if (s_[pos_] == '0') {
      ++pos_;
    } else if (is_digit(s_[pos_])) {
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    } else {
      return false;
    }
    bool is_float = false;
    if (eat('.')) {
      is_float = true;
      if (pos_ >= s_.size() || !is_digit(s_[pos_])) return false;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      is_float = true;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ >= s_.size() || !is_digit(s_[pos_])) return false;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    }
    if (out) {
      const std::string_view lexeme = s_.substr(start, pos_ - start);
      out->append(is_float ? reformat_float_lexeme(lexeme) : std::string(lexeme));
    }
    return true;
  }

  bool string_lit(std::string* out, std::string* decoded_out) {
    const std::size_t start = pos_;
    if (!eat('"')) return false;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      const auto c = static_cast<unsigned char>(s_[pos_]);
      if (c < 0x20) return false;
      if (c == '\\') ++pos_;
      ++pos_;
    }
    if (!eat('"')) return false;
    if (!out && !decoded_out) return true;
    std::string decoded;
    try {
      decoded = nlohmann::json::parse(s_.substr(start, pos_ - start)).get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return false;
    }
    if (out) out->append(nlohmann::json(decoded).dump());
    if (decoded_out) *decoded_out = std::move(decoded);
    return true;
  }

  bool array(std::string* out) {
    eat('[');
    if (out) out->push_back('[');
    skip_ws();
    if (eat(']')) {
      if (out) out->push_back(']');
      return true;
    }
    bool first = true;
    while (true) {
      skip_ws();
      if (!first && out) out->push_back(',');
      first = false;
      if (!value(out)) return false;
      skip_ws();
      if (eat(',')) continue;
      if (eat(']')) break;
      return false;
    }
    if (out) out->push_back(']');
    return true;
  }

  bool object(std::string* out) {
    eat('{');
    // decoded key -> (canonical key, canonical value); later duplicates win
    std::vector<std::pair<std::string, std::pair<std::string, std::string>>> members;
    skip_ws();
    if (!eat('}')) {
      while (true) {
        skip_ws();
        std::string key_text, decoded, val;
        if (!string_lit(out ? &key_text : nullptr, &decoded)) return false;
        skip_ws();
        if (!eat(':')) return false;
        skip_ws();
        if (!value(out ? &val : nullptr)) return false;
        if (out) members.push_back({std::move(decoded), {std::move(key_text), std::move(val)}});
        skip_ws();
        if (eat(',')) continue;
        if (eat('}')) break;
        return false;
      }
    }
    if (!out) return true;
    std::stable_sort(members.begin(), members.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    out->push_back('{');
    bool first = true;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i + 1 < members.size() && members[i + 1].first == members[i].first) continue;
      if (!first) out->push_back(',');
      first = false;
      out->append(members[i].second.first);
      out->push_back(':');
      out->append(members[i].second.second);
    }
    out->push_back('}');
    return true;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

std::string normalize_lines(std::string_view text) {
  std::string out;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);
    while (!line.empty() && is_space(line.back())) line.remove_suffix(1);

    std::size_t i = 0;
    while (i < line.size()) {
      if (is_space(line[i])) {
        out.push_back(line[i++]);
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && !is_space(line[j])) ++j;
      const std::string_view token = line.substr(i, j - i);
      if (looks_like_float(token)) {
        out += reformat_float_lexeme(token);
      } else {
        out.append(token);
      }
      i = j;
    }
    out.push_back('\n');
    line_start = line_end + 1;
  }
  while (!out.empty() && is_space(out.back())) out.pop_back();
  return out;
}

}  // namespace

std::string format_float(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.9g", value);
  std::string out(buf);
  if (!out.empty() && out.back() == '.') out.push_back('0');
  return out;
}

std::optional<std::string> canonical_json(std::string_view text) { return Canonicalizer(text).run(); }

std::optional<std::string_view> raw_member(std::string_view text, std::string_view key) {
  return Canonicalizer(text).member(key);
}

std::string normalize(std::string_view raw) {
  std::size_t valid = 0;
  const std::string text = sanitize_utf8(raw, valid);
  if (!raw.empty() && valid == 0) {
    throw Error(ErrorKind::OutputDecodeError, "output contains no decodable UTF-8");
  }
  if (auto canonical = canonical_json(text)) return *canonical;
  std::string lines = normalize_lines(text);
  // Float rewriting can turn near-JSON into JSON; settle on the JSON form so
  // a second pass is a no-op.
  if (auto canonical = canonical_json(lines)) return *canonical;
  return lines;
}

}  // namespace sde
