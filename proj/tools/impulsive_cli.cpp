#include "impulsive/cli.hpp"

int main(int argc, char** argv) { return impulsive::run_cli(argc, argv); }
