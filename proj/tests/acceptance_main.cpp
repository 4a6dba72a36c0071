#include "w2v/session.hpp"
int main() { return 0; }
