#include "cli/commands.hpp"

int main(int argc, char** argv) {
  return pcfeat::cli::run_command(argc, argv);
}
