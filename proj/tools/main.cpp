#include "cli.hpp"

int main(int argc, char** argv) { return klb::cli::run(argc, argv); }
