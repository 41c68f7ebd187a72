"""The bounded-context services, the saga coordinator, and the read side."""
