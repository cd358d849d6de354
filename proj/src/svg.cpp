#include "shapebots/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <map>
#include <optional>
#include <string>

#include "shapebots/error.hpp"

namespace shapebots {

namespace {

constexpr int kMaxSubdivisionDepth = 24;

void subdivide_cubic(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double tol, int depth, std::vector<Vec2>& out) {
  // The curve lies in the hull of its control points, so the control point
  // distance to the chord bounds the curve's deviation from it.
  const double dev = std::max(distance_to_segment(p1, p0, p3), distance_to_segment(p2, p0, p3));
  if (dev <= tol || depth >= kMaxSubdivisionDepth) {
    out.push_back(p3);
    return;
  }
  const Vec2 p01 = (p0 + p1) * 0.5, p12 = (p1 + p2) * 0.5, p23 = (p2 + p3) * 0.5;
  const Vec2 p012 = (p01 + p12) * 0.5, p123 = (p12 + p23) * 0.5;
  const Vec2 mid = (p012 + p123) * 0.5;
  subdivide_cubic(p0, p01, p012, mid, tol, depth + 1, out);
  subdivide_cubic(mid, p123, p23, p3, tol, depth + 1, out);
}

void subdivide_quadratic(Vec2 p0, Vec2 p1, Vec2 p2, double tol, int depth, std::vector<Vec2>& out) {
  if (distance_to_segment(p1, p0, p2) <= tol || depth >= kMaxSubdivisionDepth) {
    out.push_back(p2);
    return;
  }
  const Vec2 p01 = (p0 + p1) * 0.5, p12 = (p1 + p2) * 0.5;
  const Vec2 mid = (p01 + p12) * 0.5;
  subdivide_quadratic(p0, p01, mid, tol, depth + 1, out);
  subdivide_quadratic(mid, p12, p2, tol, depth + 1, out);
}

// ---------------------------------------------------------------------------
// XML scanning. Only what SVG files in the wild need: prolog, comments,
// doctype, CDATA, nested elements with quoted attributes.

struct Attribute {
  std::string value;
  std::size_t offset = 0;  // byte offset of the first character of the value
};

struct Element {
  std::string name;
  std::map<std::string, Attribute> attributes;
  std::size_t offset = 0;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':' ||
         (static_cast<unsigned char>(c) >= 0x80);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string decode_entities(std::string_view raw, std::size_t base) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out.push_back(raw[i]);
      continue;
    }
    const std::size_t end = raw.find(';', i);
    if (end == std::string_view::npos) throw ParseError("unterminated entity", base + i);
    const std::string_view ent = raw.substr(i + 1, end - i - 1);
    if (ent == "amp") out.push_back('&');
    else if (ent == "lt") out.push_back('<');
    else if (ent == "gt") out.push_back('>');
    else if (ent == "quot") out.push_back('"');
    else if (ent == "apos") out.push_back('\'');
    else if (!ent.empty() && ent[0] == '#') {
      unsigned long code = 0;
      const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      const char* first = ent.data() + (hex ? 2 : 1);
      auto [ptr, ec] = std::from_chars(first, ent.data() + ent.size(), code, hex ? 16 : 10);
      if (ec != std::errc{} || ptr != ent.data() + ent.size()) throw ParseError("bad character reference", base + i);
      // Coordinates are ASCII; anything else only needs to survive as a byte.
      out.push_back(code < 0x80 ? static_cast<char>(code) : '?');
    } else {
      throw ParseError("unknown entity '&" + std::string(ent) + ";'", base + i);
    }
    i = end;
  }
  return out;
}

class XmlScanner {
 public:
  explicit XmlScanner(std::string_view doc) : doc_(doc) {}

  /// Invokes `on_element` for every start (or empty) element in document
  /// order, with the current nesting path of element names.
  template <typename F>
  void scan(F&& on_element) {
    std::vector<std::string> stack;
    bool seen_root = false;
    if (doc_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    while (pos_ < doc_.size()) {
      const std::size_t lt = doc_.find('<', pos_);
      if (lt == std::string_view::npos) {
        check_text(pos_, doc_.size(), stack.empty());
        pos_ = doc_.size();
        break;
      }
      check_text(pos_, lt, stack.empty());
      pos_ = lt;
      if (starts_with("<?")) {
        skip_past("?>", "unterminated processing instruction");
      } else if (starts_with("<!--")) {
        skip_past("-->", "unterminated comment");
      } else if (starts_with("<![CDATA[")) {
        if (stack.empty()) throw ParseError("CDATA outside root element", pos_);
        skip_past("]]>", "unterminated CDATA section");
      } else if (starts_with("<!DOCTYPE")) {
        skip_doctype();
      } else if (starts_with("</")) {
        const std::size_t at = pos_;
        pos_ += 2;
        const std::string name = read_name();
        skip_spaces();
        expect('>');
        if (stack.empty() || stack.back() != name) {
          throw ParseError("mismatched end tag </" + name + ">", at);
        }
        stack.pop_back();
      } else {
        if (stack.empty() && seen_root) throw ParseError("content after root element", pos_);
        seen_root = true;
        Element el;
        el.offset = pos_;
        ++pos_;
        el.name = read_name();
        bool self_closing = false;
        for (;;) {
          const bool had_space = skip_spaces();
          if (pos_ >= doc_.size()) throw ParseError("unterminated start tag <" + el.name + ">", el.offset);
          if (doc_[pos_] == '>') {
            ++pos_;
            break;
          }
          if (starts_with("/>")) {
            pos_ += 2;
            self_closing = true;
            break;
          }
          if (!had_space) throw ParseError("expected whitespace before attribute", pos_);
          const std::size_t name_at = pos_;
          std::string attr = read_name();
          skip_spaces();
          expect('=');
          skip_spaces();
          if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
            throw ParseError("expected quoted attribute value", pos_);
          }
          const char quote = doc_[pos_++];
          const std::size_t close = doc_.find(quote, pos_);
          if (close == std::string_view::npos) throw ParseError("unterminated attribute value", pos_);
          const std::string_view raw = doc_.substr(pos_, close - pos_);
          if (raw.find('<') != std::string_view::npos) {
            throw ParseError("'<' in attribute value", pos_ + raw.find('<'));
          }
          Attribute value{decode_entities(raw, pos_), pos_};
          if (!el.attributes.emplace(attr, std::move(value)).second) {
            throw ParseError("duplicate attribute '" + attr + "'", name_at);
          }
          pos_ = close + 1;
        }
        stack.push_back(el.name);
        on_element(el, stack);
        if (self_closing) stack.pop_back();
      }
    }
    if (!stack.empty()) throw ParseError("unclosed element <" + stack.back() + ">", doc_.size());
    if (!seen_root) throw ParseError("no root element", doc_.size());
  }

 private:
  bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  void skip_past(std::string_view terminator, const char* message) {
    const std::size_t end = doc_.find(terminator, pos_);
    if (end == std::string_view::npos) throw ParseError(message, pos_);
    pos_ = end + terminator.size();
  }

  void skip_doctype() {
    const std::size_t at = pos_;
    int bracket = 0;
    for (; pos_ < doc_.size(); ++pos_) {
      const char c = doc_[pos_];
      if (c == '[') ++bracket;
      else if (c == ']') --bracket;
      else if (c == '>' && bracket == 0) {
        ++pos_;
        return;
      }
    }
    throw ParseError("unterminated DOCTYPE", at);
  }

  bool skip_spaces() {
    const std::size_t start = pos_;
    while (pos_ < doc_.size() && is_space(doc_[pos_])) ++pos_;
    return pos_ != start;
  }

  void expect(char c) {
    if (pos_ >= doc_.size() || doc_[pos_] != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::string read_name() {
    const std::size_t start = pos_;
    while (pos_ < doc_.size() && is_name_char(doc_[pos_])) ++pos_;
    if (pos_ == start) throw ParseError("expected a name", start);
    return std::string(doc_.substr(start, pos_ - start));
  }

  void check_text(std::size_t from, std::size_t to, bool outside_root) const {
    if (!outside_root) return;
    for (std::size_t i = from; i < to; ++i) {
      if (!is_space(doc_[i])) throw ParseError("text outside root element", i);
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Number and path-data parsing.

class NumberReader {
 public:
  NumberReader(std::string_view text, std::size_t base) : text_(text), base_(base) {}

  void skip_separators() {
    while (i_ < text_.size() && (is_space(text_[i_]) || text_[i_] == ',')) ++i_;
  }

  bool at_end() {
    skip_separators();
    return i_ >= text_.size();
  }

  bool at_number() {
    skip_separators();
    if (i_ >= text_.size()) return false;
    const char c = text_[i_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  std::size_t offset() const { return base_ + i_; }
  char peek() const { return i_ < text_.size() ? text_[i_] : '\0'; }
  void advance() { ++i_; }

  double number() {
    skip_separators();
    const std::size_t start = i_;
    std::size_t j = i_;
    auto digits = [&] {
      const std::size_t d0 = j;
      while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
      return j - d0;
    };
    if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
    std::size_t mantissa = digits();
    if (j < text_.size() && text_[j] == '.') {
      ++j;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("expected a number", base_ + start);
    if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
      const std::size_t exp_start = k;
      while (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) ++k;
      if (k > exp_start) j = k;
    }
    std::string_view token = text_.substr(start, j - start);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
      throw ParseError("invalid number", base_ + start);
    }
    i_ = j;
    return value;
  }

 private:
  std::string_view text_;
  std::size_t base_;
  std::size_t i_ = 0;
};

/// Parses a length attribute: a number optionally followed by "px".
double parse_length(const Attribute& attr) {
  std::string_view text = attr.value;
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  std::size_t unit_at = text.size();
  while (unit_at > 0 && std::isalpha(static_cast<unsigned char>(text[unit_at - 1]))) --unit_at;
  const std::string_view unit = text.substr(unit_at);
  if (!unit.empty() && unit != "px") {
    throw UnsupportedFeature("unit '" + std::string(unit) + "'", attr.offset + unit_at);
  }
  if (!text.empty() && text.back() == '%') throw UnsupportedFeature("percentage length", attr.offset);
  NumberReader reader(text.substr(0, unit_at), attr.offset);
  const double v = reader.number();
  if (!reader.at_end()) throw ParseError("trailing characters in length", reader.offset());
  return v;
}

std::optional<double> length_attr(const Element& el, const char* name) {
  const auto it = el.attributes.find(name);
  if (it == el.attributes.end()) return std::nullopt;
  return parse_length(it->second);
}

class PathBuilder {
 public:
  PathBuilder(const SvgOptions& options, std::vector<Polyline>& out) : options_(options), out_(out) {}

  void move_to(Vec2 p) {
    finish(false);
    current_ = {p * options_.mm_per_unit};
  }
  void line_to(Vec2 p) { ensure_started(); current_.push_back(p * options_.mm_per_unit); }
  void cubic_to(Vec2 c1, Vec2 c2, Vec2 p) {
    ensure_started();
    const double s = options_.mm_per_unit;
    const auto pts = flatten_cubic(current_.back(), c1 * s, c2 * s, p * s, options_.flatten_tolerance);
    current_.insert(current_.end(), pts.begin() + 1, pts.end());
  }
  void quad_to(Vec2 c, Vec2 p) {
    ensure_started();
    const double s = options_.mm_per_unit;
    const auto pts = flatten_quadratic(current_.back(), c * s, p * s, options_.flatten_tolerance);
    current_.insert(current_.end(), pts.begin() + 1, pts.end());
  }
  void close() {
    if (current_.empty()) return;
    const Vec2 start = current_.front();
    finish(true);
    current_ = {start};
    pending_start_ = true;
  }
  void finish(bool closed) {
    if (pending_start_ && current_.size() == 1) {
      current_.clear();
      pending_start_ = false;
      return;
    }
    pending_start_ = false;
    if (current_.size() >= 2) {
      if (auto line = Polyline::try_make(std::move(current_), closed)) out_.push_back(std::move(*line));
    }
    current_.clear();
  }

 private:
  void ensure_started() {
    if (current_.empty()) current_ = {Vec2{}};
    pending_start_ = false;
  }

  const SvgOptions& options_;
  std::vector<Polyline>& out_;
  std::vector<Vec2> current_;
  bool pending_start_ = false;  // current_ holds only the point left by a Z
};

void parse_path_data(const Attribute& d, const SvgOptions& options, std::vector<Polyline>& out) {
  NumberReader r(d.value, d.offset);
  PathBuilder builder(options, out);
  Vec2 cur{}, start{};
  char command = '\0';
  bool have_command = false;
  bool any_move = false;

  while (!r.at_end()) {
    const char c = r.peek();
    const std::size_t at = r.offset();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      r.advance();
      switch (c) {
        case 'M': case 'm': case 'L': case 'l': case 'H': case 'h': case 'V': case 'v':
        case 'C': case 'c': case 'Q': case 'q': case 'Z': case 'z':
          break;
        case 'A': case 'a': case 'S': case 's': case 'T': case 't':
          throw UnsupportedFeature(std::string("path command ") + c, at);
        default:
          throw ParseError(std::string("unknown path command '") + c + "'", at);
      }
      if (!any_move && c != 'M' && c != 'm') throw ParseError("path data must begin with a moveto", at);
      command = c;
      have_command = true;
      if (c == 'Z' || c == 'z') {
        builder.close();
        cur = start;
        continue;
      }
    } else if (!have_command) {
      throw ParseError("path data must begin with a command", at);
    } else if (command == 'Z' || command == 'z') {
      throw ParseError("numbers after closepath", at);
    }

    const bool rel = std::islower(static_cast<unsigned char>(command)) != 0;
    const Vec2 base = rel ? cur : Vec2{};
    switch (command) {
      case 'M': case 'm': {
        const double x = r.number(), y = r.number();
        cur = base + Vec2{x, y};
        start = cur;
        builder.move_to(cur);
        any_move = true;
        command = rel ? 'l' : 'L';  // subsequent pairs are implicit linetos
        break;
      }
      case 'L': case 'l': {
        const double x = r.number(), y = r.number();
        cur = base + Vec2{x, y};
        builder.line_to(cur);
        break;
      }
      case 'H': case 'h':
        cur.x = (rel ? cur.x : 0.0) + r.number();
        builder.line_to(cur);
        break;
      case 'V': case 'v':
        cur.y = (rel ? cur.y : 0.0) + r.number();
        builder.line_to(cur);
        break;
      case 'C': case 'c': {
        const double x1 = r.number(), y1 = r.number(), x2 = r.number(), y2 = r.number();
        const double x = r.number(), y = r.number();
        const Vec2 end = base + Vec2{x, y};
        builder.cubic_to(base + Vec2{x1, y1}, base + Vec2{x2, y2}, end);
        cur = end;
        break;
      }
      case 'Q': case 'q': {
        const double x1 = r.number(), y1 = r.number(), x = r.number(), y = r.number();
        const Vec2 end = base + Vec2{x, y};
        builder.quad_to(base + Vec2{x1, y1}, end);
        cur = end;
        break;
      }
      default:
        break;
    }
  }
  builder.finish(false);
}

std::vector<Vec2> parse_points(const Attribute& attr, double scale) {
  NumberReader r(attr.value, attr.offset);
  std::vector<Vec2> pts;
  while (!r.at_end()) {
    const double x = r.number();
    if (r.at_end()) throw ParseError("odd number of coordinates in points", r.offset());
    const double y = r.number();
    pts.push_back(Vec2{x, y} * scale);
  }
  return pts;
}

void push_if_valid(std::vector<Polyline>& out, std::vector<Vec2> pts, bool closed) {
  if (auto line = Polyline::try_make(std::move(pts), closed)) out.push_back(std::move(*line));
}

}  // namespace

std::vector<Vec2> flatten_cubic(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3, double tolerance) {
  if (!(tolerance > 0.0)) throw InvalidArgument("flatten tolerance must be positive");
  std::vector<Vec2> out{p0};
  subdivide_cubic(p0, p1, p2, p3, tolerance, 0, out);
  return out;
}

std::vector<Vec2> flatten_quadratic(Vec2 p0, Vec2 p1, Vec2 p2, double tolerance) {
  if (!(tolerance > 0.0)) throw InvalidArgument("flatten tolerance must be positive");
  std::vector<Vec2> out{p0};
  subdivide_quadratic(p0, p1, p2, tolerance, 0, out);
  return out;
}

std::vector<Polyline> parse_svg(std::string_view document, const SvgOptions& options) {
  if (!(options.mm_per_unit > 0.0) || !std::isfinite(options.mm_per_unit)) {
    throw InvalidArgument("mm_per_unit must be positive");
  }
  if (!(options.flatten_tolerance > 0.0)) throw InvalidArgument("flatten tolerance must be positive");

  std::vector<Polyline> out;
  const double s = options.mm_per_unit;
  XmlScanner scanner(document);
  scanner.scan([&](const Element& el, const std::vector<std::string>& stack) {
    for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
      if (stack[i] == "defs" || stack[i] == "clipPath" || stack[i] == "mask" || stack[i] == "symbol") return;
    }
    if (el.name == "path") {
      const auto d = el.attributes.find("d");
      if (d != el.attributes.end()) parse_path_data(d->second, options, out);
    } else if (el.name == "polyline" || el.name == "polygon") {
      const auto pts = el.attributes.find("points");
      if (pts != el.attributes.end()) push_if_valid(out, parse_points(pts->second, s), el.name == "polygon");
    } else if (el.name == "rect") {
      const double x = length_attr(el, "x").value_or(0.0), y = length_attr(el, "y").value_or(0.0);
      const double w = length_attr(el, "width").value_or(0.0), h = length_attr(el, "height").value_or(0.0);
      if (w > 0.0 && h > 0.0) {
        push_if_valid(out, {Vec2{x, y} * s, Vec2{x + w, y} * s, Vec2{x + w, y + h} * s, Vec2{x, y + h} * s}, true);
      }
    } else if (el.name == "line") {
      const double x1 = length_attr(el, "x1").value_or(0.0), y1 = length_attr(el, "y1").value_or(0.0);
      const double x2 = length_attr(el, "x2").value_or(0.0), y2 = length_attr(el, "y2").value_or(0.0);
      push_if_valid(out, {Vec2{x1, y1} * s, Vec2{x2, y2} * s}, false);
    }
  });
  return out;
}

}  // namespace shapebots
