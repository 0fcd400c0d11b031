#pragma once

// Line-granularity view of target sources and the patches that edit them.
//
// A roster holds every file of the target as a list of lines. Every line that
// survives the strip policy is a mutation point. Edits name lines by their
// ORIGINAL coordinates, so applying a patch never has to track index shifts:
// each original line is a slot that may be deleted or overwritten, and may
// have copies of other lines inserted in front of it.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cachegi/text_util.hpp"

namespace cachegi {

class SourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PatchParseError : public SourceError {
 public:
  PatchParseError(std::size_t item, const std::string& what)
      : SourceError("patch item " + std::to_string(item) + ": " + what), item_(item) {}
  // 1-based position of the offending comma-separated item.
  std::size_t item() const noexcept { return item_; }

 private:
  std::size_t item_;
};

enum class StripPolicy { none, comments_and_blank };

inline std::string_view to_string(StripPolicy p) {
  return p == StripPolicy::none ? "none" : "comments_and_blank";
}

inline StripPolicy parse_strip_policy(std::string_view s) {
  if (s == "none") return StripPolicy::none;
  if (s == "comments_and_blank") return StripPolicy::comments_and_blank;
  throw SourceError("unknown strip policy '" + std::string(s) + "'");
}

/// 0-based (file, line) position in the roster as ingested.
struct LineRef {
  std::size_t file = 0;
  std::size_t line = 0;
  auto operator<=>(const LineRef&) const = default;
};

struct SourceFile {
  std::string path;
  std::vector<std::string> lines;
  bool trailing_newline = true;
};

struct SourceRoster {
  std::vector<SourceFile> files;
  std::vector<LineRef> mutable_points;
  StripPolicy strip_policy = StripPolicy::none;

  std::size_t size() const noexcept { return mutable_points.size(); }

  bool contains(LineRef r) const noexcept {
    return r.file < files.size() && r.line < files[r.file].lines.size();
  }

  const std::string& text(LineRef r) const { return files.at(r.file).lines.at(r.line); }

  std::vector<std::string> file_names() const {
    std::vector<std::string> names;
    names.reserve(files.size());
    for (const auto& f : files) names.push_back(f.path);
    return names;
  }
};

enum class EditKind { deletion, insertion, replacement };

struct Edit {
  EditKind kind = EditKind::deletion;
  LineRef target;
  std::optional<LineRef> source;

  bool operator==(const Edit&) const = default;

  static Edit deletion(LineRef t) { return {EditKind::deletion, t, std::nullopt}; }
  static Edit insertion(LineRef before, LineRef of) { return {EditKind::insertion, before, of}; }
  static Edit replacement(LineRef t, LineRef with) { return {EditKind::replacement, t, with}; }
};

struct Patch {
  std::vector<Edit> edits;

  bool empty() const noexcept { return edits.empty(); }
  std::size_t size() const noexcept { return edits.size(); }
  bool operator==(const Patch&) const = default;
};

/// Patched text of one file, LF-terminated lines.
struct PatchedFile {
  std::string path;
  std::string text;
};
using PatchedSource = std::vector<PatchedFile>;

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text, bool& trailing_newline) {
  std::vector<std::string> lines;
  trailing_newline = text.empty() || text.back() == '\n';
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

// `#` starts a comment unless it introduces a preprocessor directive
// (`#include`, `#define`, ...), which is code.
inline bool is_hash_comment(std::string_view t) {
  if (t.empty() || t.front() != '#') return false;
  if (t.size() == 1) return true;
  const char c = t[1];
  return !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'));
}

inline std::vector<std::string> strip_comments_and_blank(const std::vector<std::string>& lines) {
  std::vector<std::string> kept;
  bool in_block = false;
  for (const auto& line : lines) {
    std::string_view t = trim(line);
    if (in_block || t.starts_with("/*")) {
      const auto from = in_block ? 0 : 2;
      const auto close = t.find("*/", from);
      if (close == std::string_view::npos) {
        in_block = true;
        continue;
      }
      in_block = false;
      // Code after the closing marker keeps the line.
      if (trim(t.substr(close + 2)).empty()) continue;
      kept.push_back(line);
      continue;
    }
    if (t.empty() || t.starts_with("//") || is_hash_comment(t)) continue;
    kept.push_back(line);
  }
  return kept;
}

inline std::string ref_to_string(LineRef r, bool with_file, const std::vector<std::string>& names) {
  std::string out;
  if (with_file) {
    out += r.file < names.size() ? names[r.file] : std::to_string(r.file);
    out += ':';
  }
  out += std::to_string(r.line + 1);
  return out;
}

}  // namespace detail

/// Builds a roster from in-memory (path, text) pairs.
inline SourceRoster roster_from_text(const std::vector<std::pair<std::string, std::string>>& sources,
                                     StripPolicy policy) {
  SourceRoster roster;
  roster.strip_policy = policy;
  for (const auto& [path, text] : sources) {
    SourceFile file;
    file.path = path;
    file.lines = detail::split_lines(text, file.trailing_newline);
    if (policy == StripPolicy::comments_and_blank) {
      file.lines = detail::strip_comments_and_blank(file.lines);
      file.trailing_newline = true;
    }
    const std::size_t fi = roster.files.size();
    for (std::size_t li = 0; li < file.lines.size(); ++li) roster.mutable_points.push_back({fi, li});
    roster.files.push_back(std::move(file));
  }
  if (roster.mutable_points.empty()) throw SourceError("roster has no mutable lines; search would be vacuous");
  return roster;
}

inline SourceRoster ingest_source(const std::vector<std::filesystem::path>& paths, StripPolicy policy) {
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw SourceError("cannot read source file '" + p.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw SourceError("error reading source file '" + p.string() + "'");
    sources.emplace_back(p.string(), buf.str());
  }
  return roster_from_text(sources, policy);
}

/// Applies `patch` to `roster`. All coordinates refer to the original lines.
/// For a slot, the last Deletion/Replacement in patch order wins; multiple
/// Insertions before the same slot appear in patch order.
inline PatchedSource apply_patch(const SourceRoster& roster, const Patch& patch) {
  struct Slot {
    std::vector<const std::string*> before;
    const std::string* content = nullptr;
    bool deleted = false;
  };
  std::vector<std::vector<Slot>> slots(roster.files.size());
  for (std::size_t f = 0; f < roster.files.size(); ++f) {
    slots[f].resize(roster.files[f].lines.size());
    for (std::size_t l = 0; l < slots[f].size(); ++l) slots[f][l].content = &roster.files[f].lines[l];
  }

  for (std::size_t i = 0; i < patch.edits.size(); ++i) {
    const Edit& e = patch.edits[i];
    const auto bad = [&](const char* what) {
      return SourceError("edit " + std::to_string(i + 1) + ": " + what);
    };
    if (!roster.contains(e.target)) throw bad("target out of range");
    if (e.kind != EditKind::deletion) {
      if (!e.source) throw bad("missing source line");
      if (!roster.contains(*e.source)) throw bad("source out of range");
    }
    Slot& slot = slots[e.target.file][e.target.line];
    switch (e.kind) {
      case EditKind::deletion:
        slot.deleted = true;
        break;
      case EditKind::replacement:
        slot.deleted = false;
        slot.content = &roster.text(*e.source);
        break;
      case EditKind::insertion:
        slot.before.push_back(&roster.text(*e.source));
        break;
    }
  }

  PatchedSource out;
  out.reserve(roster.files.size());
  for (std::size_t f = 0; f < roster.files.size(); ++f) {
    std::string text;
    const auto& fs = slots[f];
    std::size_t emitted = 0;
    for (const auto& slot : fs) {
      for (const auto* ins : slot.before) {
        text += *ins;
        text += '\n';
        ++emitted;
      }
      if (!slot.deleted) {
        text += *slot.content;
        text += '\n';
        ++emitted;
      }
    }
    if (emitted > 0 && !roster.files[f].trailing_newline) text.pop_back();
    out.push_back({roster.files[f].path, std::move(text)});
  }
  return out;
}

/// Canonical patch text. The `<file>:` prefix is written only for
/// multi-file rosters (`file_names.size() > 1`).
inline std::string format_patch(const Patch& patch, const std::vector<std::string>& file_names = {}) {
  const bool with_file = file_names.size() > 1;
  std::string out;
  for (std::size_t i = 0; i < patch.edits.size(); ++i) {
    const Edit& e = patch.edits[i];
    if (i) out += ", ";
    switch (e.kind) {
      case EditKind::deletion:
        out += "Deletion " + detail::ref_to_string(e.target, with_file, file_names);
        break;
      case EditKind::insertion:
        out += "Insertion before " + detail::ref_to_string(e.target, with_file, file_names) + " of " +
               detail::ref_to_string(*e.source, with_file, file_names);
        break;
      case EditKind::replacement:
        out += "Replacement " + detail::ref_to_string(e.target, with_file, file_names) + " <- " +
               detail::ref_to_string(*e.source, with_file, file_names);
        break;
    }
  }
  return out;
}

/// Parses the patch grammar:
///   Deletion <ref> | Insertion before <ref> of <ref> | Replacement <ref> <- <ref>
/// joined by commas, where <ref> is `[<file>:]<line>` with 1-based lines.
/// A file prefix is resolved against `file_names`; without a prefix the edit
/// refers to the first file.
inline Patch parse_patch(std::string_view text, const std::vector<std::string>& file_names = {}) {
  Patch patch;
  if (detail::trim(text).empty()) return patch;

  std::size_t item_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = detail::trim(text.substr(pos, comma - pos));
    ++item_no;
    pos = comma + 1;

    std::vector<std::string_view> tok;
    for (std::size_t i = 0; i < item.size();) {
      while (i < item.size() && std::isspace(static_cast<unsigned char>(item[i]))) ++i;
      std::size_t j = i;
      while (j < item.size() && !std::isspace(static_cast<unsigned char>(item[j]))) ++j;
      if (j > i) tok.push_back(item.substr(i, j - i));
      i = j;
    }

    const auto parse_ref = [&](std::string_view s) -> LineRef {
      LineRef r;
      const auto colon = s.rfind(':');
      std::string_view num = s;
      if (colon != std::string_view::npos) {
        const std::string_view name = s.substr(0, colon);
        num = s.substr(colon + 1);
        const auto it = std::find(file_names.begin(), file_names.end(), name);
        if (it == file_names.end()) {
          // Accept a bare file name when the roster holds full paths.
          const auto by_base = std::find_if(file_names.begin(), file_names.end(), [&](const std::string& p) {
            return std::filesystem::path(p).filename() == std::filesystem::path(std::string(name));
          });
          if (by_base == file_names.end())
            throw PatchParseError(item_no, "unknown file '" + std::string(name) + "'");
          r.file = static_cast<std::size_t>(by_base - file_names.begin());
        } else {
          r.file = static_cast<std::size_t>(it - file_names.begin());
        }
      }
      std::size_t n = 0;
      const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
      if (ec != std::errc() || p != num.data() + num.size() || n == 0)
        throw PatchParseError(item_no, "bad line number '" + std::string(num) + "'");
      r.line = n - 1;
      return r;
    };

    if (tok.size() == 2 && tok[0] == "Deletion") {
      patch.edits.push_back(Edit::deletion(parse_ref(tok[1])));
    } else if (tok.size() == 5 && tok[0] == "Insertion" && tok[1] == "before" && tok[3] == "of") {
      patch.edits.push_back(Edit::insertion(parse_ref(tok[2]), parse_ref(tok[4])));
    } else if (tok.size() == 4 && tok[0] == "Replacement" && tok[2] == "<-") {
      patch.edits.push_back(Edit::replacement(parse_ref(tok[1]), parse_ref(tok[3])));
    } else {
      throw PatchParseError(item_no, "malformed edit '" + std::string(item) + "'");
    }
    if (comma == text.size()) break;
  }
  return patch;
}

/// Writes patched sources beneath `dir`, keeping each file's name.
inline void write_patched_source(const PatchedSource& src, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : src) {
    const auto dest = dir / std::filesystem::path(f.path).filename();
    std::ofstream out(dest, std::ios::binary);
    if (!out) throw SourceError("cannot write '" + dest.string() + "'");
    out << f.text;
  }
}

}  // namespace cachegi
