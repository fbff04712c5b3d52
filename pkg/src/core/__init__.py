# Instance model, oracles and transcripts
