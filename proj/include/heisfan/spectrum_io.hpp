#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "heisfan/spectrum.hpp"

namespace heisfan {

/// Labels of an entry as `L(n,a)|F(k,l);...`.
std::string joined_labels(const SpectrumEntry& entry);

/// `eigenvalue,multiplicity,labels` after '#' header lines.
void write_spectrum_csv(std::ostream& os, const SpectrumTable& table, const std::vector<std::string>& header = {});
/// `{cutoff, entries:[{eigenvalue, exact, multiplicity, labels:[...]}]}`.
void write_spectrum_json(std::ostream& os, const SpectrumTable& table);

/// `eigenvalue,alpha_1..alpha_m,odd_1..odd_m`, streamed straight from the enumeration.
/// Returns the number of records written.
std::size_t write_fan_csv(std::ostream& os, int m, double cutoff, const std::vector<std::string>& header = {});

/// `eigenvalue,multiplicity,labels` for the H-type table.
void write_htype_csv(std::ostream& os, const HtypeSpectrumTable& table, const std::vector<std::string>& header = {});
void write_htype_json(std::ostream& os, const HtypeSpectrumTable& table, int d, const std::vector<double>& beta);

}  // namespace heisfan
