#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace heisfan {

/// "%.17g"; non-finite values print as "nan", "inf" or "-inf".
std::string format_double(double v);

/// Streaming JSON emitter with fixed float formatting (17 significant digits),
/// so identical inputs give byte-identical documents.
class JsonWriter
{
 public:
  explicit JsonWriter(std::ostream& os, int indent = 2);
  ~JsonWriter();

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);

  JsonWriter& value(double v);  ///< non-finite values become null
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();
  /// Inserts an already serialized JSON value verbatim.
  JsonWriter& raw(std::string_view json);

  template <typename T>
  JsonWriter& field(std::string_view k, const T& v)
  {
    key(k);
    return value(v);
  }

  template <typename T>
  JsonWriter& array(std::string_view k, const std::vector<T>& values)
  {
    key(k);
    begin_array();
    for (const auto& v : values) value(v);
    return end_array();
  }

 private:
  void before_value();
  void newline();

  std::ostream& os_;
  int indent_;
  struct Level
  {
    bool is_object = false;
    bool empty = true;
  };
  std::vector<Level> stack_;
  bool after_key_ = false;
};

std::string json_escape(std::string_view s);

}  // namespace heisfan
