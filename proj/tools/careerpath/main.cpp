#include "careerpath/commands.hpp"

int main(int argc, char** argv) { return careerpath::cli::run_cli(argc, argv); }
