#include "heisfan/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace heisfan {

std::string format_double(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(std::string_view s)
{
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

JsonWriter::JsonWriter(std::ostream& os, int indent) : os_(os), indent_(indent) {}

JsonWriter::~JsonWriter() = default;

void JsonWriter::newline()
{
  if (indent_ <= 0) return;
  os_ << '\n';
  for (std::size_t i = 0; i < stack_.size() * static_cast<std::size_t>(indent_); ++i) os_ << ' ';
}

void JsonWriter::before_value()
{
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (stack_.empty()) return;
  if (stack_.back().is_object) throw std::logic_error("JsonWriter: value inside object needs a key");
  if (!stack_.back().empty) os_ << ',';
  stack_.back().empty = false;
  newline();
}

JsonWriter& JsonWriter::begin_object()
{
  before_value();
  os_ << '{';
  stack_.push_back({true, true});
  return *this;
}

JsonWriter& JsonWriter::end_object()
{
  if (stack_.empty() || !stack_.back().is_object) throw std::logic_error("JsonWriter: unbalanced object");
  const bool empty = stack_.back().empty;
  stack_.pop_back();
  if (!empty) newline();
  os_ << '}';
  if (stack_.empty() && indent_ > 0) os_ << '\n';
  return *this;
}

JsonWriter& JsonWriter::begin_array()
{
  before_value();
  os_ << '[';
  stack_.push_back({false, true});
  return *this;
}

JsonWriter& JsonWriter::end_array()
{
  if (stack_.empty() || stack_.back().is_object) throw std::logic_error("JsonWriter: unbalanced array");
  const bool empty = stack_.back().empty;
  stack_.pop_back();
  if (!empty) newline();
  os_ << ']';
  if (stack_.empty() && indent_ > 0) os_ << '\n';
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view k)
{
  if (stack_.empty() || !stack_.back().is_object) throw std::logic_error("JsonWriter: key outside object");
  if (!stack_.back().empty) os_ << ',';
  stack_.back().empty = false;
  newline();
  os_ << '"' << json_escape(k) << "\":";
  if (indent_ > 0) os_ << ' ';
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v)
{
  before_value();
  if (std::isfinite(v))
    os_ << format_double(v);
  else
    os_ << "null";
  return *this;
}

JsonWriter& JsonWriter::value(std::int64_t v)
{
  before_value();
  os_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v)
{
  before_value();
  os_ << v;
  return *this;
}

JsonWriter& JsonWriter::value(bool v)
{
  before_value();
  os_ << (v ? "true" : "false");
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v)
{
  before_value();
  os_ << '"' << json_escape(v) << '"';
  return *this;
}

JsonWriter& JsonWriter::null()
{
  before_value();
  os_ << "null";
  return *this;
}

JsonWriter& JsonWriter::raw(std::string_view json)
{
  before_value();
  while (!json.empty() && (json.back() == '\n' || json.back() == ' ')) json.remove_suffix(1);
  os_ << json;
  return *this;
}

}  // namespace heisfan
