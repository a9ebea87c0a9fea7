// Writes a synthetic phantom image and its ground-truth mask.
//
//   bodysep_phantom --spec disk.json --image disk.pgm --truth disk_truth.png
//   bodysep_phantom --disk 40 --seed 7 --image disk.pgm

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bodysep/image_io.hpp"
#include "bodysep/phantoms.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic phantom with known ground truth."};
  std::string spec_path, image_path, truth_path;
  double disk_radius = 0;
  std::uint64_t seed = 7;
  std::size_t size = 128;
  std::string fill_value;
  auto* o_spec = app.add_option("--spec", spec_path, "Phantom spec (JSON)");
  auto* o_disk = app.add_option("--disk", disk_radius, "Centered disk phantom of this radius instead of a spec");
  app.add_option("--seed", seed, "Noise seed for --disk")->capture_default_str();
  app.add_option("--size", size, "Image side for --disk")->capture_default_str();
  app.add_option("--constant", fill_value, "Write a constant uint8 image with this value instead");
  app.add_option("--image", image_path, "Output image (.pgm, .png or .raw)")->required();
  app.add_option("--truth", truth_path, "Output ground-truth mask (.png or .pgm)");
  o_spec->excludes(o_disk);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!fill_value.empty()) {
      const double v = std::stod(fill_value);
      bodysep::ScalarImage2D img(size, size, std::vector<double>(size * size, v), bodysep::SourceDtype::uint8);
      bodysep::save_image(img, image_path);
      return 0;
    }
    bodysep::PhantomSpec spec;
    if (o_spec->count()) {
      std::ifstream in(spec_path);
      if (!in) throw bodysep::Error(bodysep::ErrorKind::io, "cannot open '" + spec_path + "'");
      spec = bodysep::phantom_from_json(nlohmann::json::parse(in));
    } else if (o_disk->count()) {
      spec = bodysep::disk_phantom(disk_radius, 200, seed, size);
    } else {
      std::cerr << "error: give --spec, --disk or --constant\n";
      return 3;
    }
    const bodysep::Phantom ph = bodysep::generate(spec);
    bodysep::save_image(ph.image, image_path);
    if (!truth_path.empty()) bodysep::save_mask(ph.truth, truth_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
