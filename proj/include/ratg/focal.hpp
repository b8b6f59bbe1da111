#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratg/error.hpp"

namespace ratg {

enum class FocalKind { method, function };

std::string_view to_string(FocalKind kind);

/// An identifier occurring in a signature. `offset` is relative to the start
/// of the declaration text.
struct IdentRef {
  std::string name;
  std::size_t offset = 0;
  bool operator==(const IdentRef&) const = default;
};

/// One parameter or result. Unnamed entries have no `name`.
struct Field {
  std::optional<std::string> name;
  std::string type_text;
  std::vector<IdentRef> type_identifiers;
  bool operator==(const Field&) const = default;
};

struct Signature {
  FocalKind kind = FocalKind::function;
  std::string name;
  std::optional<IdentRef> receiver_type;  // pointer marker and type arguments stripped
  std::optional<std::string> receiver_name;
  std::string type_params;  // verbatim "[T any]" or empty
  std::vector<std::string> type_param_names;
  std::vector<Field> params;
  std::vector<Field> returns;
  bool operator==(const Signature&) const = default;
};

struct ByteSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const ByteSpan&) const = default;
};

/// A method or function under test.
struct FocalUnit {
  Signature signature;
  std::optional<std::string> doc_comment;
  std::string source_text;   // the full declaration including its body
  std::string file_path;     // relative to the workspace root
  std::string package_path;  // package directory relative to the workspace root, "." for the root
  std::string package_name;  // from the package clause
  ByteSpan byte_span;

  const std::string& name() const { return signature.name; }
  FocalKind kind() const { return signature.kind; }
  /// Stable key such as "stack.Stack.Push" or "calc.Add".
  std::string id() const;
  bool operator==(const FocalUnit&) const = default;
};

class SignatureError : public ScanError {
 public:
  using ScanError::ScanError;
};

/// Decomposes a `func` declaration header. Grouped parameters are expanded so
/// each name carries its type; variadic types keep their "..." prefix.
/// Throws SignatureError on unbalanced brackets or a missing name.
Signature parse_signature(std::string_view decl_text);

/// The declaration text up to the end of its result list, without the body.
std::string signature_header(std::string_view decl_text);

/// Receiver, parameter and result type identifiers, first occurrence only,
/// without predeclared names or the unit's own type parameters. Offsets are
/// absolute byte offsets into the unit's file.
std::vector<IdentRef> seed_references(const FocalUnit& unit);
std::vector<std::string> seed_identifiers(const FocalUnit& unit);

enum class DeclKind { func, type, var, constant, import };

/// A top-level declaration found by lexical scanning.
struct Declaration {
  DeclKind kind;
  ByteSpan span;                         // from the keyword to the end of the declaration
  std::optional<ByteSpan> doc_span;      // the comment block immediately above
  bool grouped = false;                  // `type ( ... )` and friends
};

/// Top-level declarations of one Go source file, in source order.
std::vector<Declaration> scan_declarations(std::string_view source);

/// Name in the package clause, or empty if none was found.
std::string package_clause_name(std::string_view source);

struct FileError {
  std::string file_path;
  std::string message;
};

struct ScanResult {
  std::vector<FocalUnit> units;  // ordered by (file path, byte offset)
  std::vector<FileError> errors;
};

/// Extracts every top-level func declaration of the non-test files in `dir`.
/// Paths in the result are relative to `workspace_root` (defaults to `dir`).
/// Throws IoError when the directory cannot be read.
ScanResult scan_package(const std::filesystem::path& dir,
                        const std::optional<std::filesystem::path>& workspace_root = std::nullopt);

/// Extracts one source file held in memory.
std::vector<FocalUnit> scan_source(std::string_view source, const std::string& file_path,
                                   const std::string& package_path);

struct PackageInfo {
  std::string dir;          // relative to the module root, "." for the root
  std::string name;
  std::string import_path;
  bool operator==(const PackageInfo&) const = default;
};

/// A Go module root with its packages.
struct GoModule {
  std::filesystem::path root;
  std::string module_path;
  std::vector<PackageInfo> packages;

  const PackageInfo* find_by_dir(std::string_view dir) const;
  const PackageInfo* find_by_name(std::string_view name) const;
};

struct TreeOptions {
  bool include_vendor = false;
};

/// Reads go.mod and enumerates package directories, skipping vendor/,
/// testdata/ and directories starting with '.' or '_'.
GoModule load_module(const std::filesystem::path& root, const TreeOptions& options = {});

/// scan_package over every package of the module.
ScanResult scan_module(const GoModule& module);

struct FocalFilter {
  std::string name_pattern;  // ECMAScript regex matched against id(); empty matches all
  bool exported_only = false;
};

std::vector<FocalUnit> filter_units(const std::vector<FocalUnit>& units, const FocalFilter& filter);

bool is_exported(std::string_view identifier);

}  // namespace ratg
