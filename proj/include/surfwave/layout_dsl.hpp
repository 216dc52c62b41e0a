#pragma once

// Text format for pin layouts (.swl). One statement per line:
//
//   GRID <rows> <cols> <pitch>
//   FILL <r> <c>
//   WALL (<r>,<c>)-(<r>,<c>)            straight or 45 degree runs, inclusive
//   PRESET straight|tjunction|corner key=value ...
//   TRANSDUCER <1|2|3> at (<y>,<z>) [facing +z|-z|+y|-y]
//   # comment
//
// Lengths take an `mm` or `m` suffix; a bare number is in metres. Without a
// GRID statement the lattice is 30 x 100 with a 2 mm pitch.

#include <stdexcept>
#include <string>
#include <string_view>

#include "surfwave/layout.hpp"

namespace surfwave {

class LayoutError : public std::runtime_error {
 public:
  LayoutError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

Layout parse_layout(std::string_view text, const PresetOptions& opt = {});
Layout parse_layout_file(const std::filesystem::path& path, const PresetOptions& opt = {});

/// Emits GRID, TRANSDUCER, WALL and FILL statements reproducing the pin set
/// and transducer placement of `layout`.
std::string unparse_layout(const Layout& layout);

}  // namespace surfwave
