# Instance generators and the JSON instance file format
