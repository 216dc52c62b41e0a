#include "surfwave/layout_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "surfwave/io.hpp"

namespace surfwave {

LayoutError::LayoutError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

struct Token {
  std::string text;
  int column = 1;  // 1-based
};

// Splits on whitespace, keeping "(", ")", ",", "-" between parentheses and "="
// attached to their words; the statement parsers pick them apart.
std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') {
      break;
    }
    const std::size_t start = i;
    int depth = 0;
    while (i < line.size() && line[i] != '#') {
      const char ch = line[i];
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (depth <= 0 && std::isspace(static_cast<unsigned char>(ch))) break;
      ++i;
    }
    out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return out;
}

std::string strip_spaces(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class Parser {
 public:
  Parser(std::string_view text, const PresetOptions& opt) : text_(text), opt_(opt) {}

  Layout run() {
    std::istringstream in{std::string(text_)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      auto tokens = tokenize(raw);
      if (tokens.empty()) continue;
      statement(tokens);
    }
    if (!grid_) {
      grid_ = PinGrid(30, 100, 2e-3);
    }
    Layout out;
    out.id = preset_id_.empty() ? "custom" : preset_id_;
    out.grid = *grid_;
    for (const auto& idx : pins_) {
      out.grid.fill(idx.row, idx.col);
    }
    out.scene = scene_;
    const Extents lattice = lattice_extents(out.grid);
    if (!have_preset_) {
      out.scene.surface = lattice;
    } else {
      auto& s = out.scene.surface;
      s.y_min = std::min(s.y_min, lattice.y_min);
      s.y_max = std::max(s.y_max, lattice.y_max);
      s.z_min = std::min(s.z_min, lattice.z_min);
      s.z_max = std::max(s.z_max, lattice.z_max);
    }
    for (const auto& [id, t] : transducers_) {
      out.scene.set_transducer(t);
    }
    return out;
  }

 private:
  [[noreturn]] void fail(int column, const std::string& msg) const {
    throw LayoutError(line_, column, msg);
  }

  void statement(const std::vector<Token>& tok) {
    const std::string kw = lower(tok[0].text);
    if (kw == "grid") {
      grid_stmt(tok);
    } else if (kw == "fill") {
      fill_stmt(tok);
    } else if (kw == "wall") {
      wall_stmt(tok);
    } else if (kw == "preset") {
      preset_stmt(tok);
    } else if (kw == "transducer") {
      transducer_stmt(tok);
    } else {
      fail(tok[0].column, "unknown statement '" + tok[0].text + "'");
    }
  }

  void ensure_grid(int column) {
    if (!grid_) {
      grid_ = PinGrid(30, 100, 2e-3);
      implicit_grid_ = true;
    }
    (void)column;
  }

  int parse_int(const Token& t, std::string_view s, int column_offset = 0) const {
    int v = 0;
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    auto res = std::from_chars(b, e, v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != e) {
      fail(t.column + column_offset, "expected an integer, got '" + std::string(s) + "'");
    }
    return v;
  }

  double parse_length(const Token& t, std::string_view s, int column_offset = 0) const {
    std::string body(s);
    double scale = 1.0;
    if (body.size() > 2 && lower(body.substr(body.size() - 2)) == "mm") {
      scale = 1e-3;
      body.resize(body.size() - 2);
    } else if (body.size() > 1 && lower(body.substr(body.size() - 1)) == "m") {
      body.resize(body.size() - 1);
    } else if (!body.empty() && std::isalpha(static_cast<unsigned char>(body.back()))) {
      fail(t.column + column_offset, "unknown length unit in '" + std::string(s) + "'");
    }
    double v = 0.0;
    const auto* b = body.data();
    const auto* e = body.data() + body.size();
    auto res = std::from_chars(b, e, v);
    if (body.empty() || res.ec != std::errc{} || res.ptr != e || !std::isfinite(v)) {
      fail(t.column + column_offset, "expected a length, got '" + std::string(s) + "'");
    }
    return v * scale;
  }

  // "(a,b)" starting at offset `pos` within token text; returns the two fields
  // and advances `pos` past the closing parenthesis.
  std::pair<std::string, std::string> parse_pair(const Token& t, std::size_t& pos) const {
    const std::string& s = t.text;
    if (pos >= s.size() || s[pos] != '(') {
      fail(t.column + static_cast<int>(pos), "expected '('");
    }
    const auto comma = s.find(',', pos);
    const auto close = s.find(')', pos);
    if (comma == std::string::npos || close == std::string::npos || comma > close) {
      fail(t.column + static_cast<int>(pos), "expected '(<a>,<b>)'");
    }
    auto a = strip_spaces(s.substr(pos + 1, comma - pos - 1));
    auto b = strip_spaces(s.substr(comma + 1, close - comma - 1));
    pos = close + 1;
    return {a, b};
  }

  void expect_count(const std::vector<Token>& tok, std::size_t n, const char* usage) const {
    if (tok.size() < n) {
      fail(tok.back().column + static_cast<int>(tok.back().text.size()),
           std::string("missing arguments; expected ") + usage);
    }
    if (tok.size() > n) {
      fail(tok[n].column, "unexpected '" + tok[n].text + "'");
    }
  }

  void check_pin(const Token& t, int r, int c) const {
    if (!grid_->in_range(r, c)) {
      fail(t.column, "cavity (" + std::to_string(r) + "," + std::to_string(c) +
                         ") outside the " + std::to_string(grid_->rows()) + "x" +
                         std::to_string(grid_->cols()) + " grid");
    }
  }

  void grid_stmt(const std::vector<Token>& tok) {
    if (grid_ && !implicit_grid_) {
      fail(tok[0].column, "duplicate GRID statement (first on line " +
                              std::to_string(grid_line_) + ")");
    }
    if (grid_) {
      fail(tok[0].column, "GRID must precede FILL, WALL, PRESET and TRANSDUCER statements");
    }
    expect_count(tok, 4, "GRID <rows> <cols> <pitch>");
    const int rows = parse_int(tok[1], tok[1].text);
    const int cols = parse_int(tok[2], tok[2].text);
    const double pitch = parse_length(tok[3], tok[3].text);
    if (rows <= 0 || cols <= 0) {
      fail(tok[rows <= 0 ? 1 : 2].column, "grid dimensions must be positive");
    }
    if (!(pitch > 0.0)) {
      fail(tok[3].column, "pitch must be positive");
    }
    grid_ = PinGrid(rows, cols, pitch);
    grid_line_ = line_;
  }

  void fill_stmt(const std::vector<Token>& tok) {
    ensure_grid(tok[0].column);
    expect_count(tok, 3, "FILL <row> <col>");
    const int r = parse_int(tok[1], tok[1].text);
    const int c = parse_int(tok[2], tok[2].text);
    check_pin(tok[1], r, c);
    pins_.insert({r, c});
  }

  void wall_stmt(const std::vector<Token>& tok) {
    ensure_grid(tok[0].column);
    // Rejoin so that "(0,0) - (0,9)" and "(0,0)-(0,9)" both parse.
    Token joined{"", tok.size() > 1 ? tok[1].column : tok[0].column};
    for (std::size_t i = 1; i < tok.size(); ++i) joined.text += tok[i].text;
    if (joined.text.empty()) {
      fail(tok[0].column + 4, "expected WALL (<r>,<c>)-(<r>,<c>)");
    }
    std::size_t pos = 0;
    auto [a0, a1] = parse_pair(joined, pos);
    if (pos >= joined.text.size() || joined.text[pos] != '-') {
      fail(joined.column + static_cast<int>(pos), "expected '-' between wall end points");
    }
    ++pos;
    const std::size_t second = pos;
    auto [b0, b1] = parse_pair(joined, pos);
    if (pos != joined.text.size()) {
      fail(joined.column + static_cast<int>(pos), "unexpected text after wall");
    }
    const int r0 = parse_int(joined, a0, 1), c0 = parse_int(joined, a1, 1);
    const int r1 = parse_int(joined, b0, static_cast<int>(second) + 1);
    const int c1 = parse_int(joined, b1, static_cast<int>(second) + 1);
    const int dr = r1 - r0, dc = c1 - c0;
    if (dr != 0 && dc != 0 && std::abs(dr) != std::abs(dc)) {
      fail(joined.column, "walls must be straight or at 45 degrees");
    }
    check_pin(joined, r0, c0);
    Token end_tok{joined.text, joined.column + static_cast<int>(second)};
    check_pin(end_tok, r1, c1);
    const int n = std::max(std::abs(dr), std::abs(dc));
    const int sr = (dr > 0) - (dr < 0), sc = (dc > 0) - (dc < 0);
    for (int k = 0; k <= n; ++k) {
      pins_.insert({r0 + k * sr, c0 + k * sc});
    }
  }

  void preset_stmt(const std::vector<Token>& tok) {
    ensure_grid(tok[0].column);
    if (have_preset_) {
      fail(tok[0].column, "conflicting presets: a PRESET was already given on line " +
                              std::to_string(preset_line_));
    }
    if (tok.size() < 2) {
      fail(tok[0].column + 6, "expected PRESET straight|tjunction|corner");
    }
    const std::string kind = lower(tok[1].text);
    std::map<std::string, Token> kv;
    std::optional<LatticeIndex> anchor;
    for (std::size_t i = 2; i < tok.size(); ++i) {
      const auto eq = tok[i].text.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == tok[i].text.size()) {
        fail(tok[i].column, "expected key=value, got '" + tok[i].text + "'");
      }
      const std::string key = lower(tok[i].text.substr(0, eq));
      Token value{tok[i].text.substr(eq + 1), tok[i].column + static_cast<int>(eq) + 1};
      if (kv.count(key)) {
        fail(tok[i].column, "duplicate key '" + key + "'");
      }
      kv.emplace(key, value);
    }
    auto take = [&](const std::string& key) -> std::optional<Token> {
      auto it = kv.find(key);
      if (it == kv.end()) return std::nullopt;
      Token t = it->second;
      kv.erase(it);
      return t;
    };

    PathwaySpec spec;
    if (auto w = take("width")) spec.width_wc = parse_length(*w, w->text);
    if (auto a = take("anchor")) {
      std::size_t pos = 0;
      auto [r, c] = parse_pair(*a, pos);
      if (pos != a->text.size()) fail(a->column + static_cast<int>(pos), "unexpected text");
      anchor = LatticeIndex{parse_int(*a, r, 1), parse_int(*a, c, 1)};
    }
    if (kind == "straight") {
      if (auto l = take("length")) spec.length = parse_length(*l, l->text);
      if (auto n = take("layers")) {
        spec.layers = parse_int(*n, n->text);
        if (spec.layers < 1 || spec.layers > 4) fail(n->column, "layers must lie in 1..4");
      }
      spec.kind = StraightKind{};
    } else if (kind == "tjunction") {
      TJunctionKind j;
      if (auto m = take("mode")) {
        const std::string mode = lower(m->text);
        if (mode == "straight") {
          j.mode = JunctionMode::Straight;
        } else if (mode == "turn") {
          j.mode = JunctionMode::Turn;
        } else {
          fail(m->column, "mode must be 'straight' or 'turn'");
        }
      }
      spec.kind = j;
    } else if (kind == "corner") {
      CornerKind c;
      if (auto k = take("k")) {
        c.k = parse_int(*k, k->text);
        if (c.k < 0 || c.k > 8) fail(k->column, "corner index k must lie in 0..8");
      }
      spec.kind = c;
    } else {
      fail(tok[1].column, "unknown preset '" + tok[1].text + "'");
    }
    if (!kv.empty()) {
      const auto& [key, t] = *kv.begin();
      fail(t.column - static_cast<int>(key.size()) - 1,
           "unknown key '" + key + "' for preset " + kind);
    }

    PresetOptions opt = opt_;
    opt.pitch = grid_->pitch();
    PinPattern pat;
    try {
      pat = pattern_for(spec, opt);
    } catch (const std::exception& e) {
      fail(tok[1].column, e.what());
    }
    LatticeIndex at;
    if (anchor) {
      at = *anchor;
    } else {
      // Centre the pin bounding box in the grid.
      at.row = (grid_->rows() - (pat.row_max - pat.row_min + 1)) / 2 - pat.row_min;
      at.col = (grid_->cols() - (pat.col_max - pat.col_min + 1)) / 2 - pat.col_min;
    }
    for (const auto& idx : pat.pins) {
      const int r = at.row + idx.row, c = at.col + idx.col;
      if (!grid_->in_range(r, c)) {
        fail(tok[0].column, "preset " + kind + " does not fit the " +
                                std::to_string(grid_->rows()) + "x" +
                                std::to_string(grid_->cols()) + " grid (cavity (" +
                                std::to_string(r) + "," + std::to_string(c) + "))");
      }
      pins_.insert({r, c});
    }
    PinGrid scratch(grid_->rows(), grid_->cols(), grid_->pitch(), grid_->origin());
    PinPattern no_pins = pat;
    no_pins.pins.clear();
    scene_ = place_pattern(no_pins, scratch, at);
    preset_id_ = kind;
    if (auto* c = std::get_if<CornerKind>(&spec.kind)) preset_id_ += std::to_string(c->k);
    have_preset_ = true;
    preset_line_ = line_;
  }

  void transducer_stmt(const std::vector<Token>& tok) {
    ensure_grid(tok[0].column);
    if (tok.size() < 4) {
      fail(tok.back().column, "expected TRANSDUCER <1|2|3> at (<y>,<z>) [facing <dir>]");
    }
    const int id = parse_int(tok[1], tok[1].text);
    if (id < 1 || id > 3) fail(tok[1].column, "transducer id must be 1, 2 or 3");
    if (lower(tok[2].text) != "at") fail(tok[2].column, "expected 'at'");
    std::size_t pos = 0;
    auto [ys, zs] = parse_pair(tok[3], pos);
    if (pos != tok[3].text.size()) {
      fail(tok[3].column + static_cast<int>(pos), "unexpected text after position");
    }
    Transducer t;
    t.id = id;
    t.aperture = opt_.aperture;
    t.position = {parse_length(tok[3], ys, 1), parse_length(tok[3], zs, 1)};
    if (const auto* existing = scene_.transducer(id)) {
      t.facing = existing->facing;
      t.aperture = existing->aperture;
    } else {
      t.facing = id == 1 ? Facing::PlusZ : Facing::MinusZ;
    }
    if (tok.size() > 4) {
      if (lower(tok[4].text) != "facing" || tok.size() != 6) {
        fail(tok[4].column, "expected 'facing +z|-z|+y|-y'");
      }
      auto f = parse_facing(lower(tok[5].text));
      if (!f) fail(tok[5].column, "facing must be +z, -z, +y or -y");
      t.facing = *f;
    }
    if (transducers_.count(id)) {
      fail(tok[1].column, "transducer " + std::to_string(id) + " placed twice");
    }
    transducers_[id] = t;
  }

  std::string_view text_;
  PresetOptions opt_;
  int line_ = 0;
  std::optional<PinGrid> grid_;
  bool implicit_grid_ = false;
  int grid_line_ = 0;
  std::set<LatticeIndex> pins_;
  SceneGeometry scene_;
  bool have_preset_ = false;
  int preset_line_ = 0;
  std::string preset_id_;
  std::map<int, Transducer> transducers_;
};

// Rounded to the nanometre so emitted programs stay free of binary noise.
std::string length_mm(double metres) { return format_double(std::round(metres * 1e9) / 1e6) + "mm"; }

}  // namespace

Layout parse_layout(std::string_view text, const PresetOptions& opt) {
  return Parser(text, opt).run();
}

Layout parse_layout_file(const std::filesystem::path& path, const PresetOptions& opt) {
  return parse_layout(read_file(path), opt);
}

std::string unparse_layout(const Layout& layout) {
  const PinGrid& g = layout.grid;
  std::ostringstream out;
  out << "GRID " << g.rows() << ' ' << g.cols() << ' ' << length_mm(g.pitch()) << '\n';
  for (const auto& t : layout.scene.transducers) {
    out << "TRANSDUCER " << t.id << " at (" << length_mm(t.position.y) << ","
        << length_mm(t.position.z) << ") facing " << to_string(t.facing) << '\n';
  }
  // Horizontal runs become WALL statements, isolated pins FILL statements.
  const auto& pins = g.filled_set();
  for (auto it = pins.begin(); it != pins.end();) {
    auto run_end = it;
    auto next = std::next(it);
    while (next != pins.end() && next->row == run_end->row && next->col == run_end->col + 1) {
      run_end = next;
      ++next;
    }
    if (run_end == it) {
      out << "FILL " << it->row << ' ' << it->col << '\n';
    } else {
      out << "WALL (" << it->row << ',' << it->col << ")-(" << run_end->row << ','
          << run_end->col << ")\n";
    }
    it = next;
  }
  return out.str();
}

}  // namespace surfwave
