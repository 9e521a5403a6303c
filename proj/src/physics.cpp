#include "aigrav/physics.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace aigrav {

AtomSpecies parse_species(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(e.what(), "species");
  }
  if (!doc.is_object()) throw ValidationError("expected an object", "species");
  AtomSpecies species;
  for (const auto& [key, value] : doc.items()) {
    if (key == "mass_kg") {
      if (!value.is_number()) throw ValidationError("expected a number", "species.mass_kg");
      species.mass = value.get<double>();
    } else if (key == "wavelength_m") {
      if (!value.is_number()) throw ValidationError("expected a number", "species.wavelength_m");
      species.wavelength = value.get<double>();
    } else if (key == "label") {
      if (!value.is_string()) throw ValidationError("expected a string", "species.label");
      species.label = value.get<std::string>();
    } else {
      throw ValidationError("unknown key", "species." + key);
    }
  }
  species.validate();
  return species;
}

AtomSpecies load_species(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path, "species");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_species(buf.str());
}

}  // namespace aigrav
