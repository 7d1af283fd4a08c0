#include "grip/cli.hpp"

int main(int argc, char** argv) { return grip::cli::run(argc, argv); }
