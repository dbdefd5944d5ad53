#include <filesystem>
#include <iostream>
#include <string>

#include "ccmdp/cmdp.hpp"
#include "ccmdp/gridworld.hpp"
#include "ccmdp/io.hpp"

int main(int argc, char** argv) {
  using namespace ccmdp;
  const std::string dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  const TabularCMDP rental = build_rental_car();
  const auto emit = [&](const std::string& name, const TabularCMDP& m) {
    const std::string path = dir + "/" + name;
    write_text_file(path, cmdp_to_json(m));
    std::cout << "wrote " << path << "\n";
  };
  emit("rental_car.json", rental);
  emit("rental_car_c1.json", restrict_contexts(rental, {0}));
  emit("rental_car_c2.json", restrict_contexts(rental, {1}));
  const TabularCMDP grid_train = build_contextual_gridworld(showcase_train_grid());
  emit("grid_train.json", grid_train);
  emit("grid_pair.json", restrict_contexts(grid_train, {1, 2}));  // seek + avoid
  emit("grid_test_maze.json", build_contextual_gridworld(showcase_test_grid()));
  return 0;
}
