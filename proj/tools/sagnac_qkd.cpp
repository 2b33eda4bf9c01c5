#include "sagnac/commands.hpp"

int main(int argc, char** argv) { return sagnac::run_cli(argc, argv); }
