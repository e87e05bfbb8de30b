#include "vssc/harness.hpp"

int main(int argc, char** argv) { return vssc::run_cli(argc, argv); }
