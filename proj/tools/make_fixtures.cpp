// Writes the stable-OU stationary density oracle used by the CLI tests.
// The stationary law of dX = -lambda X dt + sigma dL has characteristic
// function exp(-sigma^alpha |xi|^alpha / (alpha lambda)), i.e. a standard
// stable law scaled by (sigma^alpha / (alpha lambda))^(1/alpha).
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include "levyfdt/grid.hpp"
#include "levyfdt/io.hpp"
#include "levyfdt/stable.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "tests/fixtures";
  const double alpha = 1.5, lambda = 1.0, sigma = 1.0;
  const levyfdt::Grid1D grid(32.0, 2048);
  const double scale = std::pow(std::pow(sigma, alpha) / (alpha * lambda), 1.0 / alpha);
  std::vector<double> x = grid.points();
  for (double& v : x) v /= scale;
  auto values = levyfdt::stable_density_oracle(levyfdt::StableParams(alpha), x);
  for (double& v : values) v /= scale;
  const levyfdt::GridField f(grid, std::move(values), levyfdt::FieldKind::density);

  levyfdt::Provenance prov;
  prov.config_hash = "oracle";
  prov.extra.emplace_back("oracle", "Fourier inversion of exp(-|xi|^1.5 / 1.5)");
  const std::string path = dir + "/stable_ou_density.csv";
  std::ofstream os(path);
  if (!os) {
    std::cerr << "cannot write " << path << '\n';
    return 1;
  }
  levyfdt::write_grid_field(os, f, prov, "p_ss");
  std::cout << "wrote " << path << '\n';
  return 0;
}
