namespace sb {
}
