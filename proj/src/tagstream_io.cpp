#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "opo/errors.hpp"
#include "opo/mc.hpp"

namespace opo::mc {

void write_tagstream(std::ostream& os, const TagStream& stream) {
  os << "# channel: " << stream.channel << '\n';
  os << "# duration_s: " << std::setprecision(17) << stream.duration_s << '\n';
  os << "# seed: " << stream.seed << '\n';
  os << "# provenance: " << stream.provenance << '\n';
  os << std::setprecision(12);
  for (double t : stream.timestamps) os << t << '\n';
}

TagStream read_tagstream(std::istream& is) {
  TagStream out;
  bool have_duration = false;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
      };
      trim(key);
      trim(value);
      try {
        if (key == "channel") out.channel = value;
        else if (key == "duration_s") {
          out.duration_s = std::stod(value);
          have_duration = true;
        } else if (key == "seed") out.seed = std::stoull(value);
        else if (key == "provenance") out.provenance = value;
      } catch (const std::exception&) {
        throw ConfigError(number, "malformed header value for '" + key + "'");
      }
      continue;
    }
    try {
      std::size_t used = 0;
      out.timestamps.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw ConfigError(number, "malformed timestamp");
    }
  }
  if (!have_duration) throw ConfigError(0, "tag stream header lacks duration_s");
  out.validate();
  return out;
}

void write_histogram_csv(std::ostream& os, const CoincidenceHistogram& hist) {
  os << "delay_s,counts\n" << std::setprecision(12);
  for (std::size_t i = 0; i < hist.bins(); ++i) os << hist.bin_center(i) << ',' << hist.counts[i] << '\n';
}

} // namespace opo::mc
