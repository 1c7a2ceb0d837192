// Populated alongside its module.
