#include "nnipls_app/app.hpp"

int main(int argc, char** argv) { return nnipls::app::run(argc, argv); }
