#include "cli.hpp"

int main(int argc, char** argv) { return pothole::run_cli(argc, argv); }
