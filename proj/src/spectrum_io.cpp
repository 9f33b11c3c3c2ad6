#include "heisfan/spectrum_io.hpp"

#include <ostream>

#include "heisfan/json_writer.hpp"

namespace heisfan {

namespace {

void write_header(std::ostream& os, const std::vector<std::string>& header)
{
  for (const auto& line : header) os << "# " << line << '\n';
}

}  // namespace

std::string joined_labels(const SpectrumEntry& entry)
{
  std::string out;
  for (std::size_t i = 0; i < entry.labels.size(); ++i) {
    if (i) out += ';';
    out += entry.labels[i].to_string();
  }
  return out;
}

void write_spectrum_csv(std::ostream& os, const SpectrumTable& table, const std::vector<std::string>& header)
{
  write_header(os, header);
  os << "eigenvalue,multiplicity,labels\n";
  for (const auto& e : table.entries)
    os << format_double(e.eigenvalue) << ',' << e.multiplicity << ',' << joined_labels(e) << '\n';
}

void write_spectrum_json(std::ostream& os, const SpectrumTable& table)
{
  JsonWriter w(os);
  w.begin_object();
  w.field("cutoff", table.cutoff);
  w.field("total_multiplicity", table.total_multiplicity());
  w.key("entries").begin_array();
  for (const auto& e : table.entries) {
    w.begin_object();
    w.field("eigenvalue", e.eigenvalue);
    w.field("exact", e.key.to_string());
    w.field("multiplicity", e.multiplicity);
    w.key("labels").begin_array();
    for (const auto& l : e.labels) w.value(l.to_string());
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

std::size_t write_fan_csv(std::ostream& os, int m, double cutoff, const std::vector<std::string>& header)
{
  write_header(os, header);
  os << "eigenvalue";
  for (int j = 1; j <= m; ++j) os << ",alpha_" << j;
  for (int j = 1; j <= m; ++j) os << ",odd_" << j;
  os << '\n';
  JointLabelStream stream(m, cutoff);
  std::size_t count = 0;
  while (auto label = stream.next()) {
    const FanPoint p = fan_point(*label);
    os << format_double(p.eigenvalue);
    for (auto a : p.abs_alpha) os << ',' << a;
    for (auto o : p.odd) os << ',' << o;
    os << '\n';
    ++count;
  }
  return count;
}

void write_htype_csv(std::ostream& os, const HtypeSpectrumTable& table, const std::vector<std::string>& header)
{
  write_header(os, header);
  os << "eigenvalue,multiplicity,labels\n";
  for (const auto& e : table.entries) {
    os << format_double(e.eigenvalue) << ',' << e.multiplicity << ',';
    for (std::size_t i = 0; i < e.labels.size(); ++i) os << (i ? ";" : "") << e.labels[i].to_string();
    os << '\n';
  }
}

void write_htype_json(std::ostream& os, const HtypeSpectrumTable& table, int d, const std::vector<double>& beta)
{
  JsonWriter w(os);
  w.begin_object();
  w.field("d", d);
  w.array("beta", beta);
  w.field("cutoff", table.cutoff);
  w.key("entries").begin_array();
  for (const auto& e : table.entries) {
    w.begin_object();
    w.field("eigenvalue", e.eigenvalue);
    w.field("multiplicity", e.multiplicity);
    w.key("labels").begin_array();
    for (const auto& l : e.labels) w.value(l.to_string());
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

}  // namespace heisfan
